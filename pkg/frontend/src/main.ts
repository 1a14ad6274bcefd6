import { ExplorerClient, FrameResponse, Motion } from './api'
import { DEFAULT_STEPS, fullMotion, motionForKey } from './motion'
import { Panels, renderPanels, showToast, updateDepthReadout } from './panels'
import { MotionQueue } from './queue'
import { ExplorerState } from './state'

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

async function boot(): Promise<void> {
  const panels: Panels = {
    rgb: el<HTMLImageElement>('rgb'),
    depth: el<HTMLImageElement>('depth'),
    coverage: el('coverage'),
    accumulated: el('accumulated'),
    history: el('history'),
    readout: el('readout'),
    toast: el('toast'),
  }
  const frameSelect = el<HTMLSelectElement>('frame-select')
  const resetButton = el<HTMLButtonElement>('reset')
  const tSlider = el<HTMLInputElement>('t-step')
  const rSlider = el<HTMLInputElement>('r-step')
  const baseInput = el<HTMLInputElement>('service-url')

  const steps = { ...DEFAULT_STEPS }
  tSlider.value = String(steps.translation)
  rSlider.value = String((steps.rotation * 180) / Math.PI)
  tSlider.addEventListener('input', () => { steps.translation = Number(tSlider.value) })
  rSlider.addEventListener('input', () => { steps.rotation = (Number(rSlider.value) * Math.PI) / 180 })

  let client = new ExplorerClient(baseInput.value)
  const state = new ExplorerState()

  async function refresh(resp: FrameResponse): Promise<void> {
    state.applyFrameResponse(resp)
    // the service is the single source of truth: re-pull and compare
    const serviceState = await client.state(resp.session_id)
    if (!state.consistentWith(serviceState)) {
      showToast(panels, 'state drift detected; resyncing from service')
    }
    state.applyStateResponse(serviceState)
    renderPanels(panels, state)
    panels.rgb.decode?.().catch(() => {})
    panels.depth.onload = () => updateDepthReadout(panels)
  }

  const queue = new MotionQueue<Partial<Motion>>(
    async (m) => {
      if (!state.sessionId) return
      await refresh(await client.motion(state.sessionId, m))
    },
    4,
    (err) => showToast(panels, err instanceof Error ? err.message : String(err)),
  )

  async function openFrame(frameId: string): Promise<void> {
    await refresh(await client.createSession(frameId))
  }

  async function loadFrames(): Promise<void> {
    client = new ExplorerClient(baseInput.value)
    const frames = await client.frames()
    frameSelect.replaceChildren(
      ...frames.map((f) => {
        const option = document.createElement('option')
        option.value = f.id
        option.textContent = f.id
        return option
      }),
    )
    if (frames.length) await openFrame(frames[0].id)
  }

  frameSelect.addEventListener('change', () => {
    void openFrame(frameSelect.value).catch((err) => showToast(panels, String(err)))
  })
  baseInput.addEventListener('change', () => {
    void loadFrames().catch((err) => showToast(panels, String(err)))
  })
  resetButton.addEventListener('click', () => {
    if (!state.sessionId) return
    void client.reset(state.sessionId).then(refresh)
      .catch((err) => showToast(panels, String(err)))
  })
  window.addEventListener('keydown', (event) => {
    const motion = motionForKey(event.key, steps)
    if (motion && state.sessionId) {
      event.preventDefault()
      queue.push(fullMotion(motion))
    }
  })

  await loadFrames().catch((err) => showToast(panels, `service unreachable: ${err}`))
}

void boot()
