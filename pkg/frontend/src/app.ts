// Browser entrypoint: binds the conversation UI to the HTTP API.
// All pipeline state lives server-side; this file is DOM glue only.

import { ApiClient, ApiError } from './api.js';
import { askFlow, HistoryStore } from './askFlow.js';
import { renderBundle } from './bundleView.js';
import { pollJob } from './pollJob.js';
import type { SuggestedQuestion } from './types.js';

const client = new ApiClient('', (url, init) => fetch(url, init));
const store = new HistoryStore();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setBanner(text: string, kind: 'info' | 'warning' | 'error' = 'info'): void {
  const banner = el<HTMLDivElement>('banner');
  banner.textContent = text;
  banner.className = text ? `banner ${kind}` : 'banner hidden';
  banner.onclick = () => {
    banner.className = 'banner hidden';
  };
}

let datasourceId = '';
let sessionId = '';

async function bindDatasource(): Promise<void> {
  const target = el<HTMLInputElement>('target').value.trim();
  if (!target) return setBanner('enter a connection target first', 'warning');
  setBanner('binding datasource…');
  try {
    const { job_id } = await client.bindDatasource(target);
    const job = await pollJob(client, job_id, {
      onUpdate: (state) => setBanner(`context build: ${state.state} ${state.progress}`),
    });
    if (job.state === 'failed') return setBanner(`build failed: ${job.error}`, 'error');
    datasourceId = job.result_ref ?? '';
    ({ session_id: sessionId } = await client.openSession(datasourceId));
    setBanner(`ready — datasource ${datasourceId}`);
    await showSuggestions();
  } catch (error) {
    setBanner(error instanceof ApiError ? error.message : String(error), 'error');
  }
}

async function showSuggestions(): Promise<void> {
  const list = el<HTMLUListElement>('suggestions');
  list.innerHTML = '';
  let suggestions: SuggestedQuestion[];
  try {
    suggestions = await client.getSuggestions(datasourceId);
  } catch {
    return;
  }
  for (const suggestion of suggestions) {
    const item = document.createElement('li');
    const button = document.createElement('button');
    button.textContent = `${suggestion.text} (${suggestion.analysis_type})`;
    button.onclick = () => void ask(suggestion.text);
    item.appendChild(button);
    list.appendChild(item);
  }
}

async function ask(question: string): Promise<void> {
  if (!sessionId) return setBanner('bind a datasource first', 'warning');
  setBanner(`running: ${question}`);
  const outcome = await askFlow(client, store, sessionId, question, {
    onUpdate: (state) => setBanner(`question: ${state.state} ${state.progress}`),
  });
  if (outcome.kind === 'context-not-ready') {
    return setBanner('the data context is still building — try again shortly', 'warning');
  }
  if (outcome.kind === 'job-failed') {
    return setBanner(`run failed: ${outcome.job.error}`, 'error');
  }
  setBanner('');
  if (outcome.appended) {
    const card = document.createElement('div');
    card.innerHTML = renderBundle(outcome.entry.bundle);
    card.querySelectorAll<HTMLButtonElement>('.feedback button').forEach((button) => {
      button.onclick = () => {
        const planId = button.closest<HTMLElement>('.feedback')?.dataset['planId'];
        if (planId) {
          void client.sendFeedback(datasourceId, planId, button.dataset['satisfied'] === 'true');
          setBanner('feedback recorded');
        }
      };
    });
    el<HTMLDivElement>('history').prepend(card);
  }
}

export function wireUp(): void {
  el<HTMLButtonElement>('bind').onclick = () => void bindDatasource();
  el<HTMLFormElement>('ask-form').onsubmit = (event) => {
    event.preventDefault();
    const input = el<HTMLInputElement>('question');
    if (input.value.trim()) void ask(input.value.trim());
    input.value = '';
  };
}

if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', wireUp);
}
