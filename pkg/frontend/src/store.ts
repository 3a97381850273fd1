// View-model for one tutoring session. A pure view of the API: state changes
// only as a consequence of API responses, and a single-flight guard keeps at
// most one mutation in flight per session.

import {
  ApiError,
  ConfigName,
  TurnRecord,
  createSession,
  getSession,
  postMessage,
} from './api.js';

export interface SessionView {
  sessionId: string | null;
  config: ConfigName;
  stage: string | null;
  status: string;
  turns: TurnRecord[];
  /** cited facts of the latest instructor turn, for the KG sidebar */
  citedFacts: [string, string, string][];
  error: string | null;
  /** true while a create/send request is outstanding */
  inFlight: boolean;
}

export function emptyView(config: ConfigName = 'agent_kg'): SessionView {
  return {
    sessionId: null,
    config,
    stage: null,
    status: 'Idle',
    turns: [],
    citedFacts: [],
    error: null,
    inFlight: false,
  };
}

function latestCitedFacts(turns: TurnRecord[]): [string, string, string][] {
  for (let i = turns.length - 1; i >= 0; i--) {
    if (turns[i].role === 'Instructor') return turns[i].cited_facts;
  }
  return [];
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    if (err.status === 409) return 'session complete';
    if (err.status === 0) return err.message;
    return `HTTP ${err.status}: ${err.message}`;
  }
  return String(err);
}

export class SessionStore {
  view: SessionView;
  private listeners: Array<(view: SessionView) => void> = [];

  constructor(config: ConfigName = 'agent_kg') {
    this.view = emptyView(config);
  }

  subscribe(listener: (view: SessionView) => void): void {
    this.listeners.push(listener);
  }

  private emit(patch: Partial<SessionView>): void {
    this.view = { ...this.view, ...patch };
    for (const listener of this.listeners) listener(this.view);
  }

  async start(config: ConfigName, problem: string): Promise<void> {
    if (this.view.inFlight) return;
    this.emit({ ...emptyView(config), inFlight: true });
    try {
      const created = await createSession(config, problem);
      this.emit({
        sessionId: created.session_id,
        stage: created.stage,
        status: created.status,
        turns: created.turns,
        citedFacts: latestCitedFacts(created.turns),
        error: null,
        inFlight: false,
      });
    } catch (err) {
      this.emit({ sessionId: null, error: describe(err), inFlight: false });
    }
  }

  async send(text: string): Promise<void> {
    const id = this.view.sessionId;
    if (id === null || this.view.inFlight) return;
    if (this.view.status === 'Completed') {
      this.emit({ error: 'session complete' });
      return;
    }
    this.emit({ inFlight: true, error: null });
    try {
      await postMessage(id, text);
      // re-fetch the canonical transcript so the rendering always matches
      // what GET /api/sessions/{id} would show after a reload
      const snapshot = await getSession(id);
      this.emit({
        stage: snapshot.stage,
        status: snapshot.status,
        turns: snapshot.turns,
        citedFacts: latestCitedFacts(snapshot.turns),
        inFlight: false,
      });
    } catch (err) {
      const completed = err instanceof ApiError && err.status === 409;
      this.emit({
        error: describe(err),
        status: completed ? 'Completed' : this.view.status,
        inFlight: false,
      });
    }
  }

  async reload(sessionId: string): Promise<void> {
    try {
      const snapshot = await getSession(sessionId);
      this.emit({
        sessionId: snapshot.session_id,
        config: snapshot.config,
        stage: snapshot.stage,
        status: snapshot.status,
        turns: snapshot.turns,
        citedFacts: latestCitedFacts(snapshot.turns),
        error: null,
        inFlight: false,
      });
    } catch (err) {
      this.emit({ error: describe(err), inFlight: false });
    }
  }
}
