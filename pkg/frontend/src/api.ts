// Typed client for the rating service. The server owns all protocol state;
// this layer only moves the session resource back and forth.

export type SessionResource = {
  id: string;
  participant: string;
  category: string;
  catalog_id: string;
  step: number;
  max_steps: number;
  // present on the wire for tooling, but never rendered (blinding)
  current_setup: number | null;
  done: boolean;
  result: number | null;
  version: number;
  clip_url: string | null;
};

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function parseDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    return body.detail ?? response.statusText;
  } catch {
    return response.statusText;
  }
}

export class RatingApi {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await parseDetail(response));
    }
    return (await response.json()) as T;
  }

  startSession(
    participant: string,
    category: string,
    catalogId: string,
  ): Promise<SessionResource> {
    return this.request<SessionResource>("/sessions", {
      method: "POST",
      body: JSON.stringify({ participant, category, catalog_id: catalogId }),
    });
  }

  getSession(id: string): Promise<SessionResource> {
    return this.request<SessionResource>(`/sessions/${id}`);
  }

  postVerdict(
    id: string,
    acceptable: boolean,
    version: number,
  ): Promise<SessionResource> {
    return this.request<SessionResource>(`/sessions/${id}/verdict`, {
      method: "POST",
      body: JSON.stringify({ acceptable, version }),
    });
  }

  clipUrl(session: SessionResource): string | null {
    if (!session.clip_url) return null;
    // version query forces the player to refetch when the clip changes
    return `${this.baseUrl}${session.clip_url}?v=${session.version}`;
  }

  async resultsCsv(category: string): Promise<string> {
    const response = await fetch(
      `${this.baseUrl}/results?category=${encodeURIComponent(category)}`,
    );
    if (!response.ok) {
      throw new ApiError(response.status, await parseDetail(response));
    }
    return response.text();
  }
}

// Median accepted SSIM of all finished panel sessions in one category;
// the result screen shows this as the current threshold estimate.
export function medianResultSsim(csv: string): number | null {
  const values: number[] = [];
  for (const line of csv.trim().split("\n").slice(1)) {
    const ssim = line.split(",")[3];
    if (ssim) values.push(Number(ssim));
  }
  if (values.length === 0) return null;
  values.sort((a, b) => a - b);
  const mid = Math.floor(values.length / 2);
  return values.length % 2
    ? values[mid]
    : (values[mid - 1] + values[mid]) / 2;
}
