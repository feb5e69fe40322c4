// Rolling error history behind the strip chart (last 30 s by default).

export interface ChartSample {
  t: number;
  posErrMm: number;
  oriErrDeg: number;
}

export class StripChart {
  private buf: ChartSample[] = [];

  constructor(public windowS = 30) {}

  push(t: number, posErrMm: number, oriErrDeg: number): void {
    const last = this.buf[this.buf.length - 1];
    if (last && t <= last.t) return; // ignore stale/duplicate ticks
    this.buf.push({ t, posErrMm, oriErrDeg });
    const cutoff = t - this.windowS;
    let drop = 0;
    while (drop < this.buf.length && this.buf[drop].t < cutoff) drop++;
    if (drop > 0) this.buf.splice(0, drop);
  }

  clear(): void {
    this.buf = [];
  }

  samples(): readonly ChartSample[] {
    return this.buf;
  }

  span(): [number, number] {
    if (this.buf.length === 0) return [0, this.windowS];
    const end = this.buf[this.buf.length - 1].t;
    return [end - this.windowS, end];
  }
}
