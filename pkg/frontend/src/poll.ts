import { RunJson } from "./types.js";

export interface PollOptions {
  intervalMs?: number;
  maxAttempts?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/**
 * Fetch a run until it reaches a terminal state (image_done or failed)
 * and return it; the caller decides how to surface a failure. Throws
 * if the run is still in flight after maxAttempts polls.
 */
export async function pollRun(
  getRun: (id: string) => Promise<RunJson>,
  runId: string,
  { intervalMs = 500, maxAttempts = 240, sleep = defaultSleep }: PollOptions = {},
): Promise<RunJson> {
  let run = await getRun(runId);
  for (let attempt = 1; attempt < maxAttempts; attempt++) {
    if (run.status === "image_done" || run.status === "failed") return run;
    await sleep(intervalMs);
    run = await getRun(runId);
  }
  if (run.status === "image_done" || run.status === "failed") return run;
  throw new Error(`run ${runId} still ${run.status} after ${maxAttempts} polls`);
}
