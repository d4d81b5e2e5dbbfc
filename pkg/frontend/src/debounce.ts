// Trailing-edge debouncer: rapid calls collapse to one run per quiet window.

export class Debouncer {
  private handle: ReturnType<typeof setTimeout> | undefined;

  constructor(readonly delayMs = 150) {}

  schedule(op: () => void): void {
    if (this.handle !== undefined) clearTimeout(this.handle);
    this.handle = setTimeout(() => {
      this.handle = undefined;
      op();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.handle !== undefined) clearTimeout(this.handle);
    this.handle = undefined;
  }
}
