/** Depth-sort worker, built from a Blob so the bundle stays one file.
 *
 * Holds the splat centers after a single "load" message; every "sort"
 * message answers with front-to-back splat ids for the given view row
 * (16-bit counting sort over quantized camera z — O(n), no comparator).
 */

export interface SortRequest {
  /** Third row of the world-to-camera transform: [r20, r21, r22, t2]. */
  viewRow: [number, number, number, number];
  generation: number;
}

const WORKER_BODY = `
let centers = null;
let count = 0;

function sortIds(viewRow) {
  const n = count;
  const z = new Float32Array(n);
  let zMin = Infinity;
  let zMax = -Infinity;
  for (let i = 0; i < n; i++) {
    const v = viewRow[0] * centers[3 * i] + viewRow[1] * centers[3 * i + 1] +
              viewRow[2] * centers[3 * i + 2] + viewRow[3];
    z[i] = v;
    if (v < zMin) zMin = v;
    if (v > zMax) zMax = v;
  }
  const buckets = 65536;
  const counts = new Uint32Array(buckets);
  const scale = zMax > zMin ? (buckets - 1) / (zMax - zMin) : 0;
  const key = new Uint32Array(n);
  for (let i = 0; i < n; i++) {
    const k = Math.min(buckets - 1, Math.max(0, Math.floor((z[i] - zMin) * scale)));
    key[i] = k;
    counts[k]++;
  }
  const starts = new Uint32Array(buckets);
  for (let i = 1; i < buckets; i++) starts[i] = starts[i - 1] + counts[i - 1];
  const order = new Int32Array(n);
  for (let i = 0; i < n; i++) order[starts[key[i]]++] = i;
  return order;
}

onmessage = (e) => {
  const msg = e.data;
  if (msg.centers) {
    centers = msg.centers;
    count = msg.count;
    return;
  }
  const order = sortIds(msg.viewRow);
  postMessage({ order, generation: msg.generation }, [order.buffer]);
};
`;

export function createSortWorker(): Worker {
  const blob = new Blob([WORKER_BODY], { type: "text/javascript" });
  return new Worker(URL.createObjectURL(blob));
}
