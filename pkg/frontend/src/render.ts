// Pure pixel math: float sample vectors -> grayscale bytes -> RGBA panels.
// Kept free of canvas so tests can assert on buffers directly.

export interface Pixels {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
}

function clamp01(v: number): number {
  return v < 0 ? 0 : v > 1 ? 1 : v;
}

export function valuesToGray(values: number[], task: string): Uint8ClampedArray<ArrayBuffer> {
  // disc samples live in [0,1]; vec samples roughly in [-2,2]
  const gray = new Uint8ClampedArray(values.length);
  for (let i = 0; i < values.length; i++) {
    const unit = task === "vec" ? clamp01((values[i] + 2) / 4) : clamp01(values[i]);
    gray[i] = Math.round(unit * 255);
  }
  return gray;
}

export function grayToPanel(
  gray: Uint8ClampedArray,
  shape: [number, number],
  scale: number,
): Pixels {
  const [h, w] = shape;
  const width = w * scale;
  const height = h * scale;
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let y = 0; y < height; y++) {
    const sy = Math.floor(y / scale);
    for (let x = 0; x < width; x++) {
      const v = gray[sy * w + Math.floor(x / scale)];
      const o = (y * width + x) * 4;
      rgba[o] = v;
      rgba[o + 1] = v;
      rgba[o + 2] = v;
      rgba[o + 3] = 255;
    }
  }
  return { width, height, rgba };
}

export function renderPanel(
  values: number[],
  task: string,
  shape: [number, number],
  scale = 8,
): Pixels {
  return grayToPanel(valuesToGray(values, task), shape, scale);
}

export function panelsEqual(a: Pixels, b: Pixels): boolean {
  if (a.width !== b.width || a.height !== b.height) return false;
  for (let i = 0; i < a.rgba.length; i++) {
    if (a.rgba[i] !== b.rgba[i]) return false;
  }
  return true;
}
