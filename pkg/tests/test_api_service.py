"""Rating-service endpoints: protocol flow, hiding, concurrency, media."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from relcomp.api_service import CatalogSource, ServiceConfig, create_app
from relcomp.profiles import (
    CodecFamily,
    EncodingProfile,
    Resolution,
    SetupCatalog,
    SetupEntry,
)

FORBIDDEN_KEYS = {"lo", "hi", "ssim", "mean_ssim", "bitrate_kbps"}


def make_catalog(n: int) -> SetupCatalog:
    entries = tuple(
        SetupEntry(
            setup_number=i + 1,
            profile=EncodingProfile(CodecFamily.H264, 23, Resolution(640, 480)),
            mean_ssim=0.99 - 0.001 * i,
            bitrate_kbps=1000.0 - i,
        )
        for i in range(n)
    )
    return SetupCatalog(entries=entries, scope=frozenset({CodecFamily.H264}))


@pytest.fixture()
def service(tmp_path):
    clips_dir = tmp_path / "clips"
    clips_dir.mkdir()
    for i in range(1, 79):
        # service only streams bytes; tiny placeholder payloads keep it fast
        (clips_dir / f"setup_{i:03d}.mp4").write_bytes(
            b"CLIP" + bytes([i]) * 64
        )
    config = ServiceConfig(
        data_dir=tmp_path / "sessions",
        catalogs={"joint": CatalogSource(catalog=make_catalog(78), clips_dir=clips_dir)},
        participants=["dr-a", "dr-b"],
    )
    return TestClient(create_app(config))


def start(service, participant="dr-a", category="HR", catalog="joint"):
    return service.post(
        "/sessions",
        json={"participant": participant, "category": category, "catalog_id": catalog},
    )


def walk_json(node):
    if isinstance(node, dict):
        for key, value in node.items():
            yield key
            yield from walk_json(value)
    elif isinstance(node, list):
        for item in node:
            yield from walk_json(item)


class TestSessionLifecycle:
    def test_create_starts_at_midpoint(self, service):
        r = start(service)
        assert r.status_code == 201
        body = r.json()
        assert body["current_setup"] == 39
        assert body["step"] == 1
        assert body["max_steps"] == 7
        assert body["done"] is False
        assert body["clip_url"].endswith("/clip")

    def test_unknown_catalog_404(self, service):
        assert start(service, catalog="nope").status_code == 404

    def test_unknown_participant_403(self, service):
        assert start(service, participant="eve").status_code == 403

    def test_duplicate_open_session_409(self, service):
        assert start(service).status_code == 201
        assert start(service).status_code == 409
        # another category or participant is fine
        assert start(service, category="R").status_code == 201
        assert start(service, participant="dr-b").status_code == 201

    def test_bad_category_422(self, service):
        assert start(service, category="XX").status_code == 422

    def test_verdict_flow_to_completion(self, service):
        body = start(service).json()
        sid, version, steps = body["id"], body["version"], 0
        while not body["done"]:
            body = service.post(
                f"/sessions/{sid}/verdict",
                json={"acceptable": body["current_setup"] <= 36, "version": version},
            ).json()
            version = body["version"]
            steps += 1
        assert steps <= 7
        assert body["result"] == 36
        assert body["clip_url"] is None

    def test_verdict_version_conflict_409(self, service):
        body = start(service).json()
        sid = body["id"]
        first = service.post(
            f"/sessions/{sid}/verdict", json={"acceptable": True, "version": 0}
        )
        second = service.post(
            f"/sessions/{sid}/verdict", json={"acceptable": False, "version": 0}
        )
        assert first.status_code == 200
        assert second.status_code == 409

    def test_verdict_after_done_410(self, service):
        body = start(service).json()
        sid = body["id"]
        while not body["done"]:
            body = service.post(
                f"/sessions/{sid}/verdict",
                json={"acceptable": False, "version": body["version"]},
            ).json()
        r = service.post(
            f"/sessions/{sid}/verdict", json={"acceptable": True, "version": 99}
        )
        assert r.status_code == 410

    def test_get_resumes_state(self, service):
        created = start(service).json()
        fetched = service.get(f"/sessions/{created['id']}").json()
        assert fetched == created
        assert service.get("/sessions/doesnotexist").status_code == 404

    def test_responses_never_leak_bounds_or_ssim(self, service):
        body = start(service).json()
        sid = body["id"]
        seen = set(walk_json(body))
        while not body["done"]:
            body = service.post(
                f"/sessions/{sid}/verdict",
                json={"acceptable": True, "version": body["version"]},
            ).json()
            seen |= set(walk_json(body))
        assert not (seen & FORBIDDEN_KEYS)


class TestClipDelivery:
    def test_clip_served_with_media_type(self, service):
        sid = start(service).json()["id"]
        r = service.get(f"/sessions/{sid}/clip")
        assert r.status_code == 200
        assert r.headers["content-type"] == "video/mp4"
        assert r.headers["accept-ranges"] == "bytes"
        assert r.content.startswith(b"CLIP")

    def test_range_request_returns_206(self, service):
        sid = start(service).json()["id"]
        r = service.get(f"/sessions/{sid}/clip", headers={"Range": "bytes=0-3"})
        assert r.status_code == 206
        assert r.content == b"CLIP"
        assert r.headers["content-range"].startswith("bytes 0-3/")
        tail = service.get(f"/sessions/{sid}/clip", headers={"Range": "bytes=4-"})
        assert tail.status_code == 206
        assert len(tail.content) == 64

    def test_invalid_range_416(self, service):
        sid = start(service).json()["id"]
        r = service.get(f"/sessions/{sid}/clip", headers={"Range": "bytes=900-999"})
        assert r.status_code == 416

    def test_clip_of_unknown_session_404(self, service):
        assert service.get("/sessions/zzz/clip").status_code == 404

    def test_clip_gone_after_completion(self, service):
        body = start(service).json()
        sid = body["id"]
        while not body["done"]:
            body = service.post(
                f"/sessions/{sid}/verdict",
                json={"acceptable": False, "version": body["version"]},
            ).json()
        assert service.get(f"/sessions/{sid}/clip").status_code == 410


class TestResults:
    def test_results_csv_per_category(self, service):
        body = start(service).json()
        sid = body["id"]
        while not body["done"]:
            body = service.post(
                f"/sessions/{sid}/verdict",
                json={"acceptable": body["current_setup"] <= 40, "version": body["version"]},
            ).json()
        r = service.get("/results", params={"category": "HR"})
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("text/csv")
        lines = r.text.strip().splitlines()
        assert lines[0] == "participant,category,result_setup,result_ssim"
        assert lines[1].startswith("dr-a,HR,40,")
        empty = service.get("/results", params={"category": "SR"})
        assert len(empty.text.strip().splitlines()) == 1

    def test_results_bad_category_422(self, service):
        assert service.get("/results", params={"category": "zz"}).status_code == 422


def test_healthz(service):
    r = service.get("/healthz")
    assert r.status_code == 200
    assert r.json()["catalogs"] == ["joint"]


def test_config_from_file(tmp_path):
    from relcomp.quality import catalog_to_csv

    catalog_csv = tmp_path / "catalog.csv"
    catalog_csv.write_text(catalog_to_csv(make_catalog(5)), encoding="utf-8")
    clips = tmp_path / "clips"
    clips.mkdir()
    config_path = tmp_path / "config.json"
    config_path.write_text(
        """
        {
          "port": 9001,
          "data_dir": "sessions",
          "participants": ["dr-a"],
          "catalogs": {"c5": {"catalog_csv": "catalog.csv", "clips_dir": "clips"}}
        }
        """,
        encoding="utf-8",
    )
    config = ServiceConfig.from_file(config_path)
    assert config.port == 9001
    assert config.data_dir == tmp_path / "sessions"
    assert len(config.catalogs["c5"].catalog) == 5
