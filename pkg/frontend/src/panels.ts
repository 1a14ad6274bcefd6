// DOM panel updates: images, coverage, accumulated-motion display,
// history trail, depth readout and error toasts.

import { Motion } from './api'
import { depthAtPixel } from './depth'
import { ExplorerState } from './state'

export interface Panels {
  rgb: HTMLImageElement
  depth: HTMLImageElement
  coverage: HTMLElement
  accumulated: HTMLElement
  history: HTMLElement
  readout: HTMLElement
  toast: HTMLElement
}

export function formatMotion(m: Motion): string {
  const t = [m.t_x, m.t_y, m.t_z].map((v) => v.toFixed(2)).join(', ')
  const r = [m.r_x, m.r_y, m.r_z].map((v) => (v * 180 / Math.PI).toFixed(1)).join(', ')
  return `t = (${t}) m   r = (${r}) deg`
}

export function renderPanels(panels: Panels, state: ExplorerState): void {
  if (state.rgbPng) panels.rgb.src = `data:image/png;base64,${state.rgbPng}`
  if (state.depthPng) panels.depth.src = `data:image/png;base64,${state.depthPng}`
  panels.coverage.textContent = `coverage ${(state.coverage * 100).toFixed(1)}%`
  panels.accumulated.textContent = formatMotion(state.accumulated)
  panels.history.replaceChildren(
    ...state.history.map((m, i) => {
      const li = document.createElement('li')
      li.textContent = `${i + 1}. ${formatMotion(m)}`
      return li
    }),
  )
}

export function showToast(panels: Panels, message: string): void {
  panels.toast.textContent = message
  panels.toast.classList.add('visible')
  setTimeout(() => panels.toast.classList.remove('visible'), 4000)
}

/** Decode the center-pixel depth from the rendered depth colormap. */
export function updateDepthReadout(panels: Panels): void {
  const img = panels.depth
  if (!img.naturalWidth) return
  const canvas = document.createElement('canvas')
  canvas.width = img.naturalWidth
  canvas.height = img.naturalHeight
  const ctx = canvas.getContext('2d')
  if (!ctx) return
  ctx.drawImage(img, 0, 0)
  const cx = Math.floor(img.naturalWidth / 2)
  const cy = Math.floor(img.naturalHeight / 2)
  const data = ctx.getImageData(0, 0, img.naturalWidth, img.naturalHeight).data
  const meters = depthAtPixel(data, img.naturalWidth, cx, cy)
  panels.readout.textContent = `center depth ${meters.toFixed(2)} m`
}
