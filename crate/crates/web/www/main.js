import init, { ticvf_compare, rate_curve, vmr } from "./pkg/motor_adapt_web.js";

const ERRORS = [1.875, 3.75, 7.5, 15, 30, 45];
const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
const ids = ["k", "p_max", "e_sat", "a", "b", "trials", "target"];

const value = (id) => Number(document.getElementById(id).value);

function axes(ctx, w, h, xMax, yMin, yMax) {
  const pad = 40;
  const sx = (x) => pad + (x / xMax) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - yMin) / (yMax - yMin)) * (h - 2 * pad);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.beginPath();
  ctx.moveTo(pad, sy(yMin));
  ctx.lineTo(pad, sy(yMax));
  ctx.moveTo(pad, sy(Math.max(yMin, Math.min(0, yMax))));
  ctx.lineTo(w - pad, sy(Math.max(yMin, Math.min(0, yMax))));
  ctx.stroke();
  ctx.fillText(yMax.toFixed(2), 2, sy(yMax) + 4);
  ctx.fillText(yMin.toFixed(2), 2, sy(yMin) + 4);
  ctx.fillText(String(xMax), w - pad - 10, h - pad + 14);
  return { sx, sy };
}

function line(ctx, xs, ys, sx, sy, color, dash = []) {
  ctx.strokeStyle = color;
  ctx.setLineDash(dash);
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]))));
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawTicvf(k, pMax, eSat, a, b, n) {
  const flat = ticvf_compare(k, pMax, eSat, a, b, new Float64Array(ERRORS), n);
  const len = n + 1;
  const trials = Array.from({ length: len }, (_, i) => i);
  const series = ERRORS.map((_, j) => ({
    coupled: flat.subarray(2 * j * len, (2 * j + 1) * len),
    standard: flat.subarray((2 * j + 1) * len, (2 * j + 2) * len),
  }));
  const all = Array.from(flat);
  const canvas = document.getElementById("ticvf");
  const ctx = canvas.getContext("2d");
  const { sx, sy } = axes(ctx, canvas.width, canvas.height, n, Math.min(0, ...all), Math.max(...all));
  series.forEach((s, j) => {
    line(ctx, trials, s.coupled, sx, sy, COLORS[j]);
    line(ctx, trials, s.standard, sx, sy, COLORS[j], [4, 3]);
  });
  document.getElementById("ticvf-legend").innerHTML =
    ERRORS.map((e, j) => `<span style="color:${COLORS[j]}">${e}&deg;</span>`).join("") +
    "<span>solid: coupled, dashed: standard</span>";
}

function drawRate(pMax, eSat) {
  const eMax = 45;
  const n = 181;
  const p = rate_curve(pMax, eSat, eMax, n);
  const es = Array.from({ length: n }, (_, i) => (i * eMax) / (n - 1));
  const canvas = document.getElementById("rate");
  const ctx = canvas.getContext("2d");
  const { sx, sy } = axes(ctx, canvas.width, canvas.height, eMax, 0, Math.max(pMax, 1e-3));
  line(ctx, es, p, sx, sy, "#1f77b4");
}

function drawVmr(k, pMax, eSat, target) {
  const n = 150;
  const flat = vmr(k, pMax, eSat, target, n);
  const trials = Array.from({ length: n + 1 }, (_, i) => i);
  const xs = trials.map((i) => flat[2 * i]);
  const es = trials.map((i) => flat[2 * i + 1]);
  const all = xs.concat(es);
  const canvas = document.getElementById("vmr");
  const ctx = canvas.getContext("2d");
  const { sx, sy } = axes(ctx, canvas.width, canvas.height, n, Math.min(0, ...all), Math.max(0, ...all));
  line(ctx, trials, xs, sx, sy, "#1f77b4");
  line(ctx, trials, es, sx, sy, "#d62728");
}

function redraw() {
  for (const id of ids) {
    document.querySelector(`output[for=${id}]`).textContent = document.getElementById(id).value;
  }
  const [k, pMax, eSat, a, b] = ["k", "p_max", "e_sat", "a", "b"].map(value);
  const err = document.getElementById("error");
  try {
    drawTicvf(k, pMax, eSat, a, b, value("trials"));
    drawRate(pMax, eSat);
    drawVmr(k, pMax, eSat, value("target"));
    err.textContent = "";
  } catch (e) {
    err.textContent = String(e.message ?? e);
  }
}

await init();
for (const id of ids) document.getElementById(id).addEventListener("input", redraw);
redraw();
