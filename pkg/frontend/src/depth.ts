// Depth colormap decoding. The service maps inverse depth over [3 m, 80 m]
// linearly onto the red channel:
//   red = round(255 * (1/d - 1/80) / (1/3 - 1/80))
// so the readout inverts that mapping.

export const DEPTH_NEAR = 3.0
export const DEPTH_FAR = 80.0

export function decodeDepthRed(red: number): number {
  const inv = (red / 255) * (1 / DEPTH_NEAR - 1 / DEPTH_FAR) + 1 / DEPTH_FAR
  return 1 / inv
}

export function encodeDepthRed(depth: number): number {
  const ratio = (1 / depth - 1 / DEPTH_FAR) / (1 / DEPTH_NEAR - 1 / DEPTH_FAR)
  return Math.round(255 * Math.min(1, Math.max(0, ratio)))
}

/** Depth at pixel (x, y) of RGBA image data (e.g. from canvas getImageData). */
export function depthAtPixel(
  rgba: Uint8ClampedArray, width: number, x: number, y: number,
): number {
  const red = rgba[(y * width + x) * 4]
  return decodeDepthRed(red)
}
