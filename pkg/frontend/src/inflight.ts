/** One prediction in flight at a time.
 *
 * Each submission supersedes the previous one: the old request is
 * aborted, and even if its response still lands (abort raced the
 * network), the stale result is discarded rather than rendered.
 */

export class LatestOnly {
  private ticket = 0;
  private controller: AbortController | null = null;

  /** Runs `task`, handing it an abort signal. Resolves with the task's
   * value when the task is still current, or `undefined` when a newer
   * submission superseded it (stale failures are swallowed too). */
  async run<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T | undefined> {
    this.controller?.abort();
    const mine = ++this.ticket;
    const controller = new AbortController();
    this.controller = controller;
    try {
      const value = await task(controller.signal);
      return this.ticket === mine ? value : undefined;
    } catch (err) {
      if (this.ticket !== mine) return undefined;
      throw err;
    }
  }
}
