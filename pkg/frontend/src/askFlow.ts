// The ask loop: submit a question, poll its job, append the bundle once.

import type { ApiClient } from './api.js';
import { ApiError } from './api.js';
import { pollJob, type PollOptions } from './pollJob.js';
import type { HistoryEntry, JobState, ResultBundle } from './types.js';

export class HistoryStore {
  readonly entries: HistoryEntry[] = [];
  private readonly seen = new Set<string>();

  /** Append once per job id; repeated polls or retries never duplicate. */
  append(entry: HistoryEntry): boolean {
    if (this.seen.has(entry.jobId)) return false;
    this.seen.add(entry.jobId);
    this.entries.push(entry);
    return true;
  }
}

export type AskOutcome =
  | { kind: 'answered'; entry: HistoryEntry; appended: boolean }
  | { kind: 'job-failed'; job: JobState }
  | { kind: 'context-not-ready'; detail: string };

export async function askFlow(
  client: ApiClient,
  store: HistoryStore,
  sessionId: string,
  question: string,
  pollOptions: PollOptions = {},
): Promise<AskOutcome> {
  let jobId: string;
  try {
    ({ job_id: jobId } = await client.submitQuestion(sessionId, question));
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      return { kind: 'context-not-ready', detail: error.message };
    }
    throw error;
  }
  const job = await pollJob(client, jobId, pollOptions);
  if (job.state === 'failed') {
    return { kind: 'job-failed', job };
  }
  const bundle: ResultBundle = await client.getJobResult(jobId);
  const entry = { jobId, bundle };
  const appended = store.append(entry);
  return { kind: 'answered', entry, appended };
}
