#!/usr/bin/env python3
"""Install static ffmpeg/ffprobe binaries from the npm registry.

The pipeline delegates encoding to an external ffmpeg with libx264, libx265,
and libaom. On hosts without a system ffmpeg (and where pip has no binary
build either), the npm registry ships static Linux x64 builds inside plain
tarballs, no postinstall downloads involved:

    @ffmpeg-installer/linux-x64   (ffmpeg, GPL static build)
    @ffprobe-installer/linux-x64  (ffprobe)

Usage:
    python3 scripts/fetch_ffmpeg.py [--dest ~/.local/bin]

Afterwards either put --dest on PATH or point the pipeline at the binaries
with RELCOMP_FFMPEG / RELCOMP_FFPROBE.
"""

import argparse
import shutil
import subprocess
import sys
import tarfile
import tempfile
from pathlib import Path

PACKAGES = {
    "@ffmpeg-installer/linux-x64": "ffmpeg",
    "@ffprobe-installer/linux-x64": "ffprobe",
}


def fetch(package: str, binary: str, dest: Path, workdir: Path) -> Path:
    subprocess.run(
        ["npm", "pack", package, "--silent"],
        cwd=workdir,
        check=True,
        stdout=subprocess.DEVNULL,
    )
    tarballs = list(workdir.glob("*.tgz"))
    if not tarballs:
        raise RuntimeError(f"npm pack produced no tarball for {package}")
    with tarfile.open(tarballs[0]) as tar:
        member = tar.getmember(f"package/{binary}")
        tar.extract(member, workdir)
    tarballs[0].unlink()
    target = dest / binary
    shutil.move(workdir / "package" / binary, target)
    target.chmod(0o755)
    return target


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--dest",
        type=Path,
        default=Path.home() / ".local" / "bin",
        help="directory to install the binaries into",
    )
    args = parser.parse_args()

    if shutil.which("npm") is None:
        print("npm is required to download the static builds", file=sys.stderr)
        return 1
    args.dest.mkdir(parents=True, exist_ok=True)
    for package, binary in PACKAGES.items():
        if shutil.which(binary):
            print(f"{binary} already on PATH, skipping")
            continue
        with tempfile.TemporaryDirectory() as tmp:
            target = fetch(package, binary, args.dest, Path(tmp))
        version = subprocess.run(
            [target, "-version"], capture_output=True, text=True
        ).stdout.splitlines()[0]
        print(f"installed {target}: {version}")
    print(
        f"\nadd {args.dest} to PATH, or export "
        f"RELCOMP_FFMPEG={args.dest / 'ffmpeg'} RELCOMP_FFPROBE={args.dest / 'ffprobe'}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
