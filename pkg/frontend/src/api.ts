// Typed client for the tutoring service API. The UI holds no dialogue logic:
// every piece of rendered state comes straight from these payloads.

export type ConfigName = 'no_agent' | 'agent_no_kg' | 'agent_kg';

export interface TurnRecord {
  index: number;
  role: 'System' | 'Instructor' | 'Learner';
  stage: string;
  strategy_arm: string | null;
  cited_facts: [string, string, string][];
  text: string;
}

export interface CreateSessionResponse {
  session_id: string;
  stage: string;
  status: string;
  turns: TurnRecord[];
}

export interface EvaluationSignal {
  score: number;
  verdict: string;
  extracted_answer: [number, number] | null;
}

export interface PostMessageResponse {
  turn: TurnRecord | null;
  stage: string;
  status: string;
  signal: EvaluationSignal;
}

export interface SessionSnapshot {
  session_id: string;
  config: ConfigName;
  stage: string;
  status: string;
  turns: TurnRecord[];
  metrics: Record<string, unknown>;
}

export interface ProblemSummary {
  id: string;
  title: string;
  statement: string;
}

export interface KgFact {
  subject: string;
  relation: string;
  object: string;
  sentence: string;
}

export interface KgQueryResponse {
  seeds: string[];
  facts: KgFact[];
  hop_limit: number;
  truncated: boolean;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(path, init);
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === 'string') detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export function createSession(
  config: ConfigName,
  problem: string,
): Promise<CreateSessionResponse> {
  return request('/api/sessions', {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ config, problem }),
  });
}

export function postMessage(sessionId: string, text: string): Promise<PostMessageResponse> {
  return request(`/api/sessions/${encodeURIComponent(sessionId)}/messages`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ text }),
  });
}

export function getSession(sessionId: string): Promise<SessionSnapshot> {
  return request(`/api/sessions/${encodeURIComponent(sessionId)}`);
}

export function listProblems(): Promise<{ problems: ProblemSummary[] }> {
  return request('/api/problems');
}

export function queryKg(point: string, hops?: number, cap?: number): Promise<KgQueryResponse> {
  const params = new URLSearchParams({ point });
  if (hops !== undefined) params.set('hops', String(hops));
  if (cap !== undefined) params.set('cap', String(cap));
  return request(`/api/kg/query?${params.toString()}`);
}
