export type Rgba = [number, number, number, number];

/** Tiny software canvas: RGBA buffer with alpha-blended primitives. */
export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Rgba = [255, 255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.data.set(background, i * 4);
    }
  }

  blend(x: number, y: number, [r, g, b, a]: Rgba): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    const alpha = a / 255;
    this.data[i] = Math.round(r * alpha + this.data[i] * (1 - alpha));
    this.data[i + 1] = Math.round(g * alpha + this.data[i + 1] * (1 - alpha));
    this.data[i + 2] = Math.round(b * alpha + this.data[i + 2] * (1 - alpha));
    this.data[i + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, color: Rgba): void {
    for (let y = Math.round(y0); y < Math.round(y0 + h); y++) {
      for (let x = Math.round(x0); x < Math.round(x0 + w); x++) {
        this.blend(x, y, color);
      }
    }
  }

  /** Bresenham segment, square pen of `thickness` pixels. */
  line(x0: number, y0: number, x1: number, y1: number, color: Rgba, thickness = 1): void {
    let x = Math.round(x0);
    let y = Math.round(y0);
    const xe = Math.round(x1);
    const ye = Math.round(y1);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    const half = Math.floor(thickness / 2);
    for (;;) {
      for (let oy = -half; oy < thickness - half; oy++) {
        for (let ox = -half; ox < thickness - half; ox++) {
          this.blend(x + ox, y + oy, color);
        }
      }
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  polyline(points: Array<[number, number]>, color: Rgba, thickness = 1): void {
    for (let i = 1; i < points.length; i++) {
      this.line(points[i - 1][0], points[i - 1][1], points[i][0], points[i][1], color, thickness);
    }
  }

  /**
   * Fill the vertical band between two polylines sharing x coordinates,
   * interpolating the edges at every pixel column.
   */
  band(
    xs: number[],
    upper: number[],
    lower: number[],
    color: Rgba,
  ): void {
    for (let i = 1; i < xs.length; i++) {
      const xa = Math.round(xs[i - 1]);
      const xb = Math.round(xs[i]);
      for (let x = Math.min(xa, xb); x <= Math.max(xa, xb); x++) {
        const t = xa === xb ? 0 : (x - xa) / (xb - xa);
        const yu = upper[i - 1] + t * (upper[i] - upper[i - 1]);
        const yl = lower[i - 1] + t * (lower[i] - lower[i - 1]);
        for (let y = Math.round(Math.min(yu, yl)); y <= Math.round(Math.max(yu, yl)); y++) {
          this.blend(x, y, color);
        }
      }
    }
  }
}
