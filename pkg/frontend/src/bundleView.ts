// Conversation-card rendering of one result bundle: clarification panel,
// decomposition list, and per-artifact SQL/trace/chart sections.

import { renderChart } from './chartRenderer.js';
import type { ResultBundle, SqlArtifact } from './types.js';

function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function renderTrace(artifact: SqlArtifact): string {
  if (!artifact.refinement_trace.length) return '';
  const rows = artifact.refinement_trace
    .map(
      (r) =>
        `<li class="trace-round"><b>round ${r.round}</b> (${r.stage}): ` +
        `<span class="error-text">${escapeHtml(r.error_text)}</span>` +
        ` → <code>${escapeHtml(r.replacement_sql)}</code></li>`,
    )
    .join('');
  return `<details class="trace"><summary>refinement trace (${artifact.refinement_trace.length})</summary><ol>${rows}</ol></details>`;
}

function renderArtifact(bundle: ResultBundle, index: number): string {
  const artifact = bundle.artifacts[index];
  if (!artifact) return '';
  const chart = bundle.charts[index] ?? null;
  const artifactId = bundle.artifact_ids[index] ?? '';
  const statusClass = artifact.status === 'executed' ? 'ok' : 'failed';
  const header =
    `<div class="artifact-header"><span class="status status-${statusClass}">${artifact.status}</span>` +
    `<code class="sql">${escapeHtml(artifact.sql || '(no SQL)')}</code></div>`;
  const chartHtml =
    artifact.status === 'executed'
      ? `<div class="chart-pane">${renderChart(chart, artifact.result_preview)}</div>`
      : `<div class="error-panel">subtask failed${artifact.refinement_trace.length ? ' after refinement' : ''}</div>`;
  return (
    `<section class="artifact" data-artifact-id="${escapeHtml(artifactId)}">` +
    `<h4>${escapeHtml(artifact.task.refined_task)}</h4>` +
    header +
    renderTrace(artifact) +
    chartHtml +
    `</section>`
  );
}

/** Render a full bundle into a conversation card (pure string → DOM-free tests). */
export function renderBundle(bundle: ResultBundle): string {
  const clarified = bundle.clarified_task;
  const ambiguities = clarified.ambiguities
    .map((a) => `<li><b>${escapeHtml(a.concept)}</b>: ${escapeHtml(a.explanation)}</li>`)
    .join('');
  const planHtml = bundle.plan.single_sql_answerable
    ? '<p class="plan">single SQL statement</p>'
    : `<ol class="plan subtasks">${bundle.plan.subtasks
        .map((s) => `<li>${escapeHtml(s.description)}</li>`)
        .join('')}</ol>`;
  const artifacts = bundle.artifacts.map((_, i) => renderArtifact(bundle, i)).join('');
  const banner = bundle.answerable
    ? ''
    : '<div class="banner warning">not answerable with the current schema</div>';
  return (
    `<article class="bundle-card" data-plan-id="${escapeHtml(bundle.plan_id)}">` +
    `<h3 class="question">${escapeHtml(bundle.question)}</h3>` +
    `<p class="refined">${escapeHtml(clarified.refined_task)}</p>` +
    (ambiguities ? `<ul class="ambiguities">${ambiguities}</ul>` : '') +
    planHtml +
    banner +
    artifacts +
    `<div class="feedback" data-plan-id="${escapeHtml(bundle.plan_id)}">` +
    `<button class="thumbs-up" data-satisfied="true">👍</button>` +
    `<button class="thumbs-down" data-satisfied="false">👎</button></div>` +
    `</article>`
  );
}
