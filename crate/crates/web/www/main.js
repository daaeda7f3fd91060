import init, { orbitProfile, twoSlitPattern, lambTrace } from "./pkg/attractorlab_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c"];

function plot(canvas, series) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 === y0) { y0 -= 0.5; y1 += 0.5; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 30, h - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);

  series.forEach((s, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.lineWidth = 1.2;
    if (s.dashed) ctx.setLineDash([5, 4]);
    ctx.beginPath();
    s.x.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(s.y[i])) : ctx.moveTo(sx(x), sy(s.y[i]))));
    ctx.stroke();
    ctx.setLineDash([]);
    if (s.label) {
      ctx.fillStyle = ctx.strokeStyle;
      ctx.fillText(s.label, w - pad - 150, pad + 14 + 14 * k);
    }
  });
}

function wire(id, compute) {
  const section = document.getElementById(id);
  const canvas = section.querySelector("canvas");
  const info = section.querySelector(".info");
  const value = (name) => Number(section.querySelector(`[name=${name}]`).value);
  const go = () => {
    info.classList.remove("error");
    try {
      const text = compute(value, canvas);
      info.textContent = text;
    } catch (e) {
      info.classList.add("error");
      info.textContent = String(e);
    }
  };
  section.querySelector("button").addEventListener("click", go);
  go();
}

await init();

wire("orbit", (v, canvas) => {
  const r = JSON.parse(orbitProfile(v("omega"), v("a0"), v("a1"), v("half")));
  plot(canvas, [
    { x: r.x, y: r.profile, label: "lattice profile" },
    { x: r.x, y: r.continuum, label: "C exp(-kappa|x|)", dashed: true },
  ]);
  return `C = ${r.amplitude.toPrecision(10)}   kappa = ${r.kappa.toPrecision(6)}`;
});

wire("slits", (v, canvas) => {
  const r = JSON.parse(twoSlitPattern(v("k"), v("width"), v("separation"), v("distance")));
  plot(canvas, [{ x: r.x1, y: r.density }]);
  const err = (100 * Math.abs(r.spacing / r.expected_spacing - 1)).toFixed(2);
  return `fringe spacing ${r.spacing.toPrecision(5)}   lambda L / d = ${r.expected_spacing.toPrecision(5)}   (${err}%)`;
});

wire("lamb", (v, canvas) => {
  const r = JSON.parse(lambTrace(v("seed"), v("energy"), v("t")));
  plot(canvas, [{ x: r.t, y: r.y, label: "y(t)" }]);
  return `limit ${r.limit}   |y(T) - limit| = ${r.limit_error.toExponential(2)}   ${r.converged ? "converged" : "not yet converged"}`;
});
