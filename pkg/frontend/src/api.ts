// Typed client for the explorer service JSON API.
// Motion payloads use the steering convention: +t_z forward, +r_y turn right.

export interface Motion {
  t_x: number
  t_y: number
  t_z: number
  r_x: number
  r_y: number
  r_z: number
}

export interface FrameInfo {
  id: string
  video: string
  frame: number
}

export interface FrameResponse {
  version: number
  session_id: string
  rgb_png: string
  depth_png: string
  coverage: number
  accumulated: Motion
  history_length: number
}

export interface StateResponse {
  version: number
  session_id: string
  frame_id: string
  accumulated: Motion
  history: Motion[]
}

export class ServiceError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message)
  }
}

export const ZERO_MOTION: Motion = { t_x: 0, t_y: 0, t_z: 0, r_x: 0, r_y: 0, r_z: 0 }

async function expectJson<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => ({}))
  if (!resp.ok) {
    throw new ServiceError(resp.status, body.code ?? 'unknown', body.message ?? resp.statusText)
  }
  return body as T
}

export class ExplorerClient {
  constructor(private base: string = '') {}

  async frames(): Promise<FrameInfo[]> {
    const body = await expectJson<{ frames: FrameInfo[] }>(await fetch(`${this.base}/frames`))
    return body.frames
  }

  async createSession(frameId: string): Promise<FrameResponse> {
    return expectJson(await fetch(`${this.base}/session`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ frame_id: frameId }),
    }))
  }

  async motion(sessionId: string, motion: Partial<Motion>): Promise<FrameResponse> {
    return expectJson(await fetch(`${this.base}/session/${sessionId}/motion`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(motion),
    }))
  }

  async reset(sessionId: string): Promise<FrameResponse> {
    return expectJson(await fetch(`${this.base}/session/${sessionId}/reset`, { method: 'POST' }))
  }

  async state(sessionId: string): Promise<StateResponse> {
    return expectJson(await fetch(`${this.base}/session/${sessionId}/state`))
  }
}
