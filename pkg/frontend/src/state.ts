// Client-side view of the session. Motion state is never computed locally:
// every displayed value comes from a service response, and after each
// action the /state endpoint is polled and checked against the response.

import { FrameResponse, Motion, StateResponse, ZERO_MOTION } from './api'
import { motionsEqual } from './motion'

export interface HistoryEntry {
  motion: Motion
  coverage: number
}

export class ExplorerState {
  sessionId: string | null = null
  frameId: string | null = null
  accumulated: Motion = { ...ZERO_MOTION }
  history: Motion[] = []
  coverage = 1
  rgbPng: string | null = null
  depthPng: string | null = null

  applyFrameResponse(resp: FrameResponse): void {
    this.sessionId = resp.session_id
    this.accumulated = resp.accumulated
    this.coverage = resp.coverage
    this.rgbPng = resp.rgb_png
    this.depthPng = resp.depth_png
  }

  applyStateResponse(state: StateResponse): void {
    this.accumulated = state.accumulated
    this.history = state.history
    this.frameId = state.frame_id
  }

  /** The single-source-of-truth invariant: our display matches /state. */
  consistentWith(state: StateResponse, tol = 1e-12): boolean {
    return motionsEqual(this.accumulated, state.accumulated, tol)
  }
}
