// DOM rendering. Everything shown comes from the SessionStore view, which in
// turn mirrors the API payloads.

import { ConfigName, ProblemSummary, listProblems } from './api.js';
import { SessionStore, SessionView } from './store.js';

const CONFIG_LABELS: Record<ConfigName, string> = {
  no_agent: 'No agent',
  agent_no_kg: 'Agent, no knowledge graph',
  agent_kg: 'Agent + knowledge graph',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderTranscript(container: HTMLElement, view: SessionView): void {
  container.replaceChildren();
  for (const turn of view.turns) {
    const row = el('div', `turn turn-${turn.role.toLowerCase()}`);
    row.appendChild(el('span', 'turn-role', turn.role));
    row.appendChild(el('span', 'turn-text', turn.text));
    container.appendChild(row);
  }
  container.scrollTop = container.scrollHeight;
}

export function renderSidebar(container: HTMLElement, view: SessionView): void {
  container.replaceChildren();
  container.appendChild(el('h2', undefined, 'Grounding'));
  if (view.citedFacts.length === 0) {
    container.appendChild(el('p', 'sidebar-empty', 'No cited facts for the latest turn.'));
    return;
  }
  const list = el('ul', 'fact-list');
  for (const [subject, relation, object] of view.citedFacts) {
    list.appendChild(el('li', 'fact', `${subject} —${relation}→ ${object}`));
  }
  container.appendChild(list);
}

export function renderStatus(badge: HTMLElement, banner: HTMLElement, view: SessionView): void {
  badge.textContent = view.stage ?? '—';
  badge.dataset.status = view.status;
  if (view.error) {
    banner.textContent = view.error;
    banner.hidden = false;
  } else {
    banner.hidden = true;
  }
}

export function mountApp(root: HTMLElement, store: SessionStore): void {
  const header = el('header');
  const configSelect = el('select') as HTMLSelectElement;
  for (const [value, label] of Object.entries(CONFIG_LABELS)) {
    const option = el('option', undefined, label) as HTMLOptionElement;
    option.value = value;
    configSelect.appendChild(option);
  }
  configSelect.value = store.view.config;
  const problemSelect = el('select') as HTMLSelectElement;
  const startButton = el('button', undefined, 'Start session') as HTMLButtonElement;
  const badge = el('span', 'stage-badge', '—');
  header.append(configSelect, problemSelect, startButton, badge);

  const banner = el('div', 'error-banner');
  banner.hidden = true;
  const transcript = el('div', 'transcript');
  const sidebar = el('aside', 'sidebar');
  const inputRow = el('form', 'input-row') as HTMLFormElement;
  const input = el('input') as HTMLInputElement;
  input.placeholder = 'Your answer…';
  const sendButton = el('button', undefined, 'Send') as HTMLButtonElement;
  sendButton.type = 'submit';
  inputRow.append(input, sendButton);

  const main = el('main');
  main.append(transcript, sidebar);
  root.append(header, banner, main, inputRow);

  store.subscribe((view) => {
    renderTranscript(transcript, view);
    renderSidebar(sidebar, view);
    renderStatus(badge, banner, view);
    const blocked = view.inFlight || view.sessionId === null || view.status === 'Completed';
    input.disabled = blocked;
    sendButton.disabled = blocked;
    startButton.disabled = view.inFlight;
    if (view.sessionId) {
      window.location.hash = view.sessionId;
    }
  });

  listProblems()
    .then(({ problems }: { problems: ProblemSummary[] }) => {
      for (const problem of problems) {
        const option = el('option', undefined, problem.title) as HTMLOptionElement;
        option.value = problem.id;
        problemSelect.appendChild(option);
      }
    })
    .catch(() => {
      banner.textContent = 'service unreachable';
      banner.hidden = false;
    });

  startButton.addEventListener('click', (event) => {
    event.preventDefault();
    void store.start(configSelect.value as ConfigName, problemSelect.value || 'chicken_rabbit');
  });

  inputRow.addEventListener('submit', (event) => {
    event.preventDefault();
    const text = input.value;
    input.value = '';
    void store.send(text);
  });

  // refresh safety: a session id in the URL hash is re-fetched on load
  const existing = window.location.hash.replace(/^#/, '');
  if (existing) void store.reload(existing);
}
