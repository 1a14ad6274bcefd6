import { describe, expect, it } from 'vitest'

import { MotionQueue } from '../src/queue'

function deferred(): { promise: Promise<void>; resolve: () => void; reject: (e: unknown) => void } {
  let resolve!: () => void
  let reject!: (e: unknown) => void
  const promise = new Promise<void>((res, rej) => { resolve = res; reject = rej })
  return { promise, resolve, reject }
}

describe('MotionQueue', () => {
  it('sends immediately when idle', async () => {
    const sent: number[] = []
    const queue = new MotionQueue<number>(async (n) => { sent.push(n) })
    queue.push(1)
    await Promise.resolve()
    expect(sent).toEqual([1])
  })

  it('holds a single request in flight and preserves order', async () => {
    const sent: number[] = []
    const gates: Array<ReturnType<typeof deferred>> = []
    const queue = new MotionQueue<number>(async (n) => {
      sent.push(n)
      const gate = deferred()
      gates.push(gate)
      await gate.promise
    })
    queue.push(1)
    queue.push(2)
    queue.push(3)
    expect(sent).toEqual([1])
    expect(queue.pendingCount).toBe(2)
    gates[0].resolve()
    await new Promise((r) => setTimeout(r))
    expect(sent).toEqual([1, 2])
    gates[1].resolve()
    await new Promise((r) => setTimeout(r))
    expect(sent).toEqual([1, 2, 3])
    gates[2].resolve()
  })

  it('drops the oldest pending beyond depth 4', async () => {
    const sent: number[] = []
    const gates: Array<ReturnType<typeof deferred>> = []
    const queue = new MotionQueue<number>(async (n) => {
      sent.push(n)
      const gate = deferred()
      gates.push(gate)
      await gate.promise
    })
    for (const n of [0, 1, 2, 3, 4, 5, 6]) queue.push(n)
    expect(sent).toEqual([0])
    expect(queue.pendingCount).toBe(4) // 1 dropped (oldest pending), 2..6 kept? no: 2,3,4,5,6 -> drops 1 and 2
    for (let i = 0; i < 6; i++) {
      gates[gates.length - 1].resolve()
      await new Promise((r) => setTimeout(r))
    }
    expect(sent).toEqual([0, 3, 4, 5, 6])
  })

  it('reports errors without breaking the pipeline', async () => {
    const errors: unknown[] = []
    const sent: number[] = []
    const queue = new MotionQueue<number>(
      async (n) => {
        if (n === 1) throw new Error('boom')
        sent.push(n)
      },
      4,
      (e) => errors.push(e),
    )
    queue.push(1)
    queue.push(2)
    await new Promise((r) => setTimeout(r))
    expect(errors).toHaveLength(1)
    expect(sent).toEqual([2])
  })
})
