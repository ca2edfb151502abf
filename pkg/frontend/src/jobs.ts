/** Job polling: progress updates until the job settles. */

import type { JobPayload, StudioClient } from "./api.js";

export interface JobWatchOptions {
  intervalMs?: number;
  onProgress?: (progress: number) => void;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function watchJob(
  client: StudioClient,
  jobId: string,
  options: JobWatchOptions = {},
): Promise<JobPayload> {
  const interval = options.intervalMs ?? 200;
  const sleep = options.sleep ?? defaultSleep;
  for (;;) {
    const job = await client.job(jobId);
    options.onProgress?.(job.progress);
    if (job.state === "done" || job.state === "failed") return job;
    await sleep(interval);
  }
}
