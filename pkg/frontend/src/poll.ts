// Poll a job to a terminal state, reporting progress along the way.

import { jobStatus } from "./api.js";
import type { JobStatus } from "./types.js";

export const POLL_INTERVAL_MS = 500;

export function pollJob(
  id: string,
  onProgress: (status: JobStatus) => void,
  intervalMs = POLL_INTERVAL_MS,
): Promise<JobStatus> {
  return new Promise((resolve, reject) => {
    const timer = setInterval(async () => {
      try {
        const status = await jobStatus(id);
        onProgress(status);
        if (status.state === "done" || status.state === "failed" || status.state === "cancelled") {
          clearInterval(timer);
          resolve(status);
        }
      } catch (error) {
        clearInterval(timer);
        reject(error);
      }
    }, intervalMs);
  });
}
