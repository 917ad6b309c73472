import init, { feature_map, filterbank_curves, synthetic_eer, csv_eer } from "./pkg/aad_demo.js";

const $ = (id) => document.getElementById(id);

function showError(el, e) {
  el.textContent = String(e);
  el.className = "out err";
}

// viridis-ish ramp
function colour(t) {
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.8 * t - 0.6)));
  const g = Math.round(255 * Math.min(1, Math.max(0, 1.2 * t)));
  const b = Math.round(255 * Math.min(1, Math.max(0, 0.6 + 0.6 * t - 1.2 * t * t)));
  return [r, g, b];
}

function renderFeatures() {
  const out = $("fm-out");
  try {
    const m = JSON.parse(feature_map($("fm-kind").value, Number($("fm-seed").value), $("fm-tag").value));
    const canvas = $("fm-canvas");
    canvas.width = m.cols;
    canvas.height = m.rows;
    const ctx = canvas.getContext("2d");
    const img = ctx.createImageData(m.cols, m.rows);
    const span = m.max - m.min || 1;
    for (let r = 0; r < m.rows; r++) {
      for (let c = 0; c < m.cols; c++) {
        // row 0 at the bottom
        const [R, G, B] = colour((m.data[r * m.cols + c] - m.min) / span);
        const i = 4 * ((m.rows - 1 - r) * m.cols + c);
        img.data[i] = R; img.data[i + 1] = G; img.data[i + 2] = B; img.data[i + 3] = 255;
      }
    }
    ctx.putImageData(img, 0, 0);
    out.className = "out";
    out.textContent = `${m.tag}: ${m.rows} x ${m.cols}, values ${m.min.toFixed(2)} .. ${m.max.toFixed(2)}`;
  } catch (e) {
    showError(out, e);
  }
}

function renderFilterbank() {
  const n = Number($("fb-n").value);
  $("fb-n-val").textContent = n;
  const fb = JSON.parse(filterbank_curves($("fb-warp").value, n));
  const canvas = $("fb-canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const fmax = fb.freqs[fb.freqs.length - 1];
  fb.filters.forEach((f, k) => {
    ctx.strokeStyle = `hsl(${(k * 360) / fb.filters.length}, 70%, 45%)`;
    ctx.beginPath();
    f.forEach((v, i) => {
      const x = (fb.freqs[i] / fmax) * (w - 1);
      const y = h - 4 - v * (h - 8);
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.stroke();
  });
}

function drawDet(res) {
  const canvas = $("eer-canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  // x axis: threshold index, so ties and outliers stay readable
  const pts = res.points;
  const x = (i) => (i / Math.max(1, pts.length - 1)) * (w - 1);
  const y = (v) => h - 4 - v * (h - 8);
  for (const [key, style] of [["far", "#c33"], ["frr", "#36c"]]) {
    ctx.strokeStyle = style;
    ctx.beginPath();
    pts.forEach((p, i) => (i ? ctx.lineTo(x(i), y(p[key])) : ctx.moveTo(x(i), y(p[key]))));
    ctx.stroke();
  }
  ctx.strokeStyle = "#999";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(0, y(res.eer / 100));
  ctx.lineTo(w, y(res.eer / 100));
  ctx.stroke();
  ctx.setLineDash([]);
  const out = $("eer-out");
  out.className = "out";
  out.textContent = `EER ${res.eer.toFixed(3)}% over ${res.n} scores (red: FAR, blue: FRR, by threshold rank)`;
}

function renderSynthetic() {
  const sep = Number($("eer-sep").value);
  $("eer-sep-val").textContent = sep.toFixed(1);
  try {
    drawDet(JSON.parse(synthetic_eer(sep, Number($("eer-n").value), 7)));
  } catch (e) {
    showError($("eer-out"), e);
  }
}

function renderPasted() {
  try {
    drawDet(JSON.parse(csv_eer($("eer-csv").value)));
  } catch (e) {
    showError($("eer-out"), e);
  }
}

await init();
$("fm-go").addEventListener("click", renderFeatures);
$("fb-warp").addEventListener("change", renderFilterbank);
$("fb-n").addEventListener("input", renderFilterbank);
$("eer-sep").addEventListener("input", renderSynthetic);
$("eer-n").addEventListener("change", renderSynthetic);
$("eer-csv-go").addEventListener("click", renderPasted);
renderFeatures();
renderFilterbank();
renderSynthetic();
