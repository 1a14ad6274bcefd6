// Keyboard steering: W/S forward-back, A/D strafe, Q/E yaw, arrows pitch/strafe.

import { Motion, ZERO_MOTION } from './api'

export interface StepSizes {
  translation: number // meters
  rotation: number // radians
}

export const DEFAULT_STEPS: StepSizes = {
  translation: 0.5,
  rotation: (2 * Math.PI) / 180,
}

export function motionForKey(key: string, steps: StepSizes): Partial<Motion> | null {
  const t = steps.translation
  const r = steps.rotation
  switch (key.length === 1 ? key.toLowerCase() : key) {
    case 'w': return { t_z: t }
    case 's': return { t_z: -t }
    case 'a': return { t_x: -t }
    case 'd': return { t_x: t }
    case 'q': return { r_y: -r } // turn left
    case 'e': return { r_y: r } // turn right
    case 'ArrowUp': return { r_x: -r } // look up (camera y points down)
    case 'ArrowDown': return { r_x: r }
    case 'ArrowLeft': return { t_x: -t }
    case 'ArrowRight': return { t_x: t }
    default: return null
  }
}

export function inverseKey(key: string): string | null {
  const pairs: Record<string, string> = {
    w: 's', s: 'w', a: 'd', d: 'a', q: 'e', e: 'q',
    ArrowUp: 'ArrowDown', ArrowDown: 'ArrowUp',
    ArrowLeft: 'ArrowRight', ArrowRight: 'ArrowLeft',
  }
  return pairs[key.length === 1 ? key.toLowerCase() : key] ?? null
}

export function fullMotion(partial: Partial<Motion>): Motion {
  return { ...ZERO_MOTION, ...partial }
}

export function isIdentity(m: Motion, tol = 1e-9): boolean {
  return (
    Math.abs(m.t_x) < tol && Math.abs(m.t_y) < tol && Math.abs(m.t_z) < tol &&
    Math.abs(m.r_x) < tol && Math.abs(m.r_y) < tol && Math.abs(m.r_z) < tol
  )
}

export function motionsEqual(a: Motion, b: Motion, tol = 1e-12): boolean {
  return (
    Math.abs(a.t_x - b.t_x) < tol && Math.abs(a.t_y - b.t_y) < tol &&
    Math.abs(a.t_z - b.t_z) < tol && Math.abs(a.r_x - b.r_x) < tol &&
    Math.abs(a.r_y - b.r_y) < tol && Math.abs(a.r_z - b.r_z) < tol
  )
}
