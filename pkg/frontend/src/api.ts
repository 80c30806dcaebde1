// Typed client for the scoring service's v1 routes. The workbench talks to
// the backend through this module only; it never computes scores itself.

export interface TriggerLevel {
  level: string;
  severity_threshold: number;
  probability_threshold: number;
  incident: { fired: boolean };
  population: { fired: boolean | null; exceedance: number | null; status: string };
}

export interface Triggers {
  t: number;
  history_size: number;
  min_samples: number;
  levels: TriggerLevel[];
}

export interface StakeholderScore {
  group: string;
  score: number;
  tier: string;
}

export interface Disagreement {
  per_dimension_variance: number[];
  max_variance: number;
  threshold: number;
  flagged: boolean;
}

export interface SensitivityResponse {
  per_stakeholder: StakeholderScore[];
  consensus: { score: number; tier: string };
  consensus_weights: number[];
  omega: number[];
  score_range: { min: number; max: number; width: number };
  stable: boolean;
  disagreement: Disagreement;
  triggers: Triggers;
  pipeline: string;
  convention_note: string;
}

export interface ThresholdsResponse {
  t: number;
  phi: number;
  levels: Record<string, { s: number; a: number }>;
}

export interface ProfileDoc {
  group: string;
  proposal: number[];
  evidence_score: number;
  expertise: number;
  impact: number;
  alpha: number;
  beta: number;
  gamma: number;
}

export interface PanelDoc {
  profiles: ProfileDoc[];
}

export interface Resolution {
  at: string;
  mode: string;
  score: number;
  tier: string;
}

export interface SessionResponse {
  session_id: string;
  incident_id: string;
  t: number;
  round: number;
  resolved: boolean;
  resolution: Resolution | null;
  panel: PanelDoc;
  sensitivity: SensitivityResponse | null;
  audit: unknown[];
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(method: string, url: string, body?: unknown): Promise<T> {
  const res = await fetch(url, {
    method,
    headers: body === undefined ? undefined : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const payload = await res.json().catch(() => ({}));
  if (!res.ok) {
    const detail =
      typeof payload === "object" && payload !== null && "detail" in payload
        ? String((payload as { detail: unknown }).detail)
        : `request failed with status ${res.status}`;
    throw new ApiError(res.status, detail);
  }
  return payload as T;
}

export class ApiClient {
  private seq = 0;

  constructor(private base: string = "") {}

  // Monotonic sequence for last-write-wins rendering of preview responses.
  nextSeq(): number {
    return ++this.seq;
  }

  sensitivity(incident: unknown, panel: PanelDoc, t: number): Promise<SensitivityResponse> {
    return request("POST", `${this.base}/v1/sensitivity`, { incident, panel, t });
  }

  thresholds(t: number): Promise<ThresholdsResponse> {
    return request("GET", `${this.base}/v1/thresholds?t=${encodeURIComponent(t)}`);
  }

  createSession(incident: unknown, panel: PanelDoc, t: number): Promise<SessionResponse> {
    return request("POST", `${this.base}/v1/sessions`, { incident, panel, t });
  }

  submitRound(sessionId: string, panel: PanelDoc): Promise<SessionResponse> {
    return request("POST", `${this.base}/v1/sessions/${sessionId}/rounds`, { panel });
  }

  resolveSession(sessionId: string): Promise<SessionResponse> {
    return request("POST", `${this.base}/v1/sessions/${sessionId}/rounds`, {
      action: "resolve",
    });
  }

  precautionaryDefault(sessionId: string): Promise<SessionResponse> {
    return request("POST", `${this.base}/v1/sessions/${sessionId}/rounds`, {
      action: "precautionary",
    });
  }

  getSession(sessionId: string): Promise<SessionResponse> {
    return request("GET", `${this.base}/v1/sessions/${sessionId}`);
  }
}
