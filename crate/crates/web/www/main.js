import init, { chainCoefficients, landauer, mapSpectra } from './pkg/dynmap_web.js';

const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b', '#e377c2', '#7f7f7f'];
const status = document.getElementById('status');

// series: [{x: [...], y: [...]}]; null/NaN entries break the line
function plot(canvas, series) {
  const ctx = canvas.getContext('2d');
  const w = canvas.width, h = canvas.height, pad = 44;
  ctx.clearRect(0, 0, w, h);
  const finite = v => v !== null && Number.isFinite(v);
  const xs = series.flatMap(s => s.x).filter(finite);
  const ys = series.flatMap(s => s.y).filter(finite);
  if (!xs.length || !ys.length) return;
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) { y0 -= 0.5; y1 += 0.5; }
  const m = 0.05 * (y1 - y0);
  y0 -= m; y1 += m;
  const px = x => pad + (x - x0) / (x1 - x0) * (w - 1.5 * pad);
  const py = y => h - pad + (y0 - y) / (y1 - y0) * (h - 1.5 * pad);

  ctx.strokeStyle = '#999';
  ctx.fillStyle = '#444';
  ctx.font = '11px sans-serif';
  ctx.strokeRect(pad, pad / 2, w - 1.5 * pad, h - 1.5 * pad);
  for (let i = 0; i <= 4; i++) {
    const xv = x0 + i * (x1 - x0) / 4, yv = y0 + i * (y1 - y0) / 4;
    ctx.fillText(xv.toPrecision(3), px(xv) - 12, h - pad + 14);
    ctx.fillText(yv.toPrecision(3), 2, py(yv) + 4);
  }

  series.forEach((s, k) => {
    ctx.strokeStyle = s.color ?? COLORS[k % COLORS.length];
    ctx.beginPath();
    let pen = false;
    s.x.forEach((x, i) => {
      const y = s.y[i];
      if (!finite(x) || !finite(y)) { pen = false; return; }
      pen ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y));
      pen = true;
    });
    ctx.stroke();
  });
}

function values(form) {
  const out = {};
  for (const [k, v] of new FormData(form)) out[k] = k === 'kind' ? v : Number(v);
  return out;
}

function bind(id, run) {
  const form = document.getElementById(id);
  const go = () => {
    try {
      run(values(form));
      status.textContent = 'ready';
      status.className = '';
    } catch (e) {
      status.textContent = `error: ${e.message ?? e}`;
      status.className = 'error';
    }
  };
  form.addEventListener('submit', ev => { ev.preventDefault(); go(); });
  go();
}

// row-major rows of varying length -> one series per column
function columns(tau, rows) {
  const width = Math.max(0, ...rows.map(r => r.length));
  return Array.from({ length: width }, (_, j) => ({ x: tau, y: rows.map(r => r[j] ?? null) }));
}

await init().catch(e => {
  status.textContent = `could not load the wasm module: ${e}`;
  status.className = 'error';
  throw e;
});

bind('chain-form', p => {
  const c = JSON.parse(chainCoefficients(p.kind, p.gamma, p.beta, p.mu, p.nu, p.n));
  const n = c.empty.gamma.map((_, i) => i);
  const nb = c.empty.beta.map((_, i) => i + 0.5);
  plot(document.getElementById('chain-plot'), [
    { x: n, y: c.empty.gamma }, { x: n, y: c.filled.gamma },
    { x: nb, y: c.empty.beta }, { x: nb, y: c.filled.beta },
  ]);
});

bind('lb-form', p => {
  const t = JSON.parse(landauer(p.sites, p.hopping, p.gamma, p.beta, p.bias, 801));
  plot(document.getElementById('lb-plot'), [{ x: t.omega, y: t.transmission }]);
  document.getElementById('lb-readout').textContent =
    `particle current ${t.particle_current.toExponential(4)}   energy current ${t.energy_current.toExponential(4)}`;
});

bind('map-form', p => {
  const m = JSON.parse(mapSpectra(p.energy, p.gamma, p.beta, p.mu, p.tau_max, p.dt));
  plot(document.getElementById('map-plot'), columns(m.tau, m.map_moduli));
  plot(document.getElementById('gen-plot'), columns(m.tau, m.generator_rates));
  const occ = m.fixed_point_occupation.at(-1);
  document.getElementById('map-readout').textContent =
    `fixed-point occupation at τ = ${m.tau.at(-1).toFixed(2)}: ${occ === null ? 'n/a' : occ.toFixed(6)}`;
});
