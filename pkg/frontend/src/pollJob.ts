// Poll a job until it reaches done/failed, with backoff and update dedupe.

import type { ApiClient } from './api.js';
import { ApiError } from './api.js';
import type { JobState } from './types.js';

export interface PollOptions {
  initialDelayMs?: number;
  maxDelayMs?: number;
  factor?: number;
  maxNetworkRetries?: number;
  onUpdate?: (state: JobState) => void;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

// One in-flight poll loop per job id: concurrent callers share the result.
const inFlight = new Map<string, Promise<JobState>>();

export function pollJob(client: ApiClient, jobId: string, options: PollOptions = {}): Promise<JobState> {
  const existing = inFlight.get(jobId);
  if (existing) return existing;
  const loop = runPollLoop(client, jobId, options).finally(() => {
    inFlight.delete(jobId);
  });
  inFlight.set(jobId, loop);
  return loop;
}

async function runPollLoop(client: ApiClient, jobId: string, options: PollOptions): Promise<JobState> {
  const {
    initialDelayMs = 150,
    maxDelayMs = 2000,
    factor = 1.6,
    maxNetworkRetries = 3,
    onUpdate,
    sleep = defaultSleep,
  } = options;

  let delay = initialDelayMs;
  let retriesLeft = maxNetworkRetries;
  let lastSeen = '';
  for (;;) {
    let state: JobState;
    try {
      state = await client.getJob(jobId);
      retriesLeft = maxNetworkRetries;
    } catch (error) {
      if (error instanceof ApiError) throw error; // 404 etc. is not retriable
      if (retriesLeft <= 0) throw error;
      retriesLeft -= 1;
      await sleep(delay);
      continue;
    }

    const fingerprint = `${state.state}:${state.progress}`;
    if (fingerprint !== lastSeen) {
      lastSeen = fingerprint;
      onUpdate?.(state);
    }
    if (state.state === 'done' || state.state === 'failed') {
      return state;
    }
    await sleep(delay);
    delay = Math.min(maxDelayMs, delay * factor);
  }
}
