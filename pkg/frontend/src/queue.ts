// One request in flight at a time; extra keypresses queue up to a depth
// of 4 with the oldest dropped, keeping motion order well defined.

export class MotionQueue<T> {
  private pending: T[] = []
  private inFlight = false

  constructor(
    private send: (item: T) => Promise<void>,
    private maxPending = 4,
    private onError: (err: unknown) => void = () => {},
  ) {}

  get pendingCount(): number {
    return this.pending.length
  }

  get busy(): boolean {
    return this.inFlight
  }

  push(item: T): void {
    if (this.inFlight) {
      this.pending.push(item)
      while (this.pending.length > this.maxPending) {
        this.pending.shift() // drop the oldest
      }
      return
    }
    void this.run(item)
  }

  private async run(item: T): Promise<void> {
    this.inFlight = true
    try {
      await this.send(item)
    } catch (err) {
      this.onError(err)
    } finally {
      this.inFlight = false
      const next = this.pending.shift()
      if (next !== undefined) {
        void this.run(next)
      }
    }
  }
}
