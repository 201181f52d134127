/**
 * Typed client for the ballotchain JSON API.
 *
 * The client performs no hashing: identity and vote digests only ever come
 * back from the service.
 */

export interface RegisterRequest {
  id_kind: string;
  id_document: string; // base64
  fingerprint: string | MinutiaeTemplateJson; // base64 image bytes or template
  pattern: string;
}

export interface MinutiaePointJson {
  x: number;
  y: number;
  theta: number;
  kind: "E" | "B";
}

export interface MinutiaeTemplateJson {
  points: MinutiaePointJson[];
}

export interface RegisterResponse {
  b_identity: string;
}

export interface LoginResponse {
  token: string;
  expires_at: string;
}

export interface Receipt {
  b_vote: string;
  block_index: number;
  election_id: string;
}

export interface BlockView {
  index: number;
  data: Record<string, unknown>;
  previous_hash: string;
  block_hash: string;
}

export interface ChainListing {
  chain: string;
  blocks: BlockView[];
  combined_hash: string | null;
}

export interface ChainReport {
  ok: boolean;
  first_bad_index: number | null;
  reason: string | null;
}

export interface VerifyResponse {
  ok: boolean;
  registry_combined_hash: string | null;
  votes_combined_hash: string | null;
  registry: ChainReport;
  votes: ChainReport;
}

export interface TallyResponse {
  counts: Record<string, number>;
  total: number;
}

export interface AnalysisResponse {
  entropy: number;
  avalanche_fraction: number;
  collision_free: boolean;
  hamming_weight_pct: number;
  char_frequency: Record<string, number>;
  bit_counts: { zeros: number; ones: number };
  combined_hash: string;
  block_count: number;
  avalanche_trials: number;
  avalanche_note: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: unknown,
  ) {
    super(`API request failed with status ${status}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies still surface through ApiError.status
    }
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown, headers?: Record<string, string>): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json", ...headers },
      body: JSON.stringify(payload),
    });
  }

  register(req: RegisterRequest): Promise<RegisterResponse> {
    return this.post("/api/register", req);
  }

  login(req: RegisterRequest): Promise<LoginResponse> {
    return this.post("/api/login", req);
  }

  vote(token: string, candidateId: string): Promise<{ receipt: Receipt }> {
    return this.post("/api/vote", { token, candidate_id: candidateId });
  }

  chain(name: "registry" | "votes"): Promise<ChainListing> {
    return this.request(`/api/chain/${name}`);
  }

  verify(): Promise<VerifyResponse> {
    return this.request("/api/verify");
  }

  tally(adminToken: string): Promise<TallyResponse> {
    return this.request("/api/tally", {
      headers: { authorization: `Bearer ${adminToken}` },
    });
  }

  analysis(adminToken: string, trials?: number, seed?: number): Promise<AnalysisResponse> {
    const params = new URLSearchParams();
    if (trials !== undefined) params.set("trials", String(trials));
    if (seed !== undefined) params.set("seed", String(seed));
    const query = params.toString();
    return this.request(`/api/analysis${query ? `?${query}` : ""}`, {
      headers: { authorization: `Bearer ${adminToken}` },
    });
  }
}

/** Encode raw bytes for transport; factor bytes never touch browser storage. */
export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  for (const b of bytes) {
    binary += String.fromCharCode(b);
  }
  return btoa(binary);
}
