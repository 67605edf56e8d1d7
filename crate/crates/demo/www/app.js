import init, { shippedCode, certify, construct, simulatePoint } from "./pkg/bmqc_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function showError(target, err) {
  target.innerHTML = `<p class="no">${String(err.message ?? err)}</p>`;
}

function renderCertificate(res) {
  const c = res.code;
  const cert = res.certificate;
  const rows = cert.subsets
    .map((s) => `<tr><td>{${s.tau.join(",")}}</td><td>${s.distinct_sums}</td>` +
      `<td>${s.degree ?? "-"}</td><td>${s.gcd_one}</td></tr>`)
    .join("");
  return `<p>N = ${c.n}, M = ${c.m}, rate ${c.rate}, z = ${c.z}, girth ${c.girth}.
    Block-MDS: <span class="${cert.verdict ? "yes" : "no"}">${cert.verdict ? "yes" : "no"}</span></p>
    <table><tr><th>excluded blocks</th><th>distinct sums</th><th>deg f</th><th>gcd(f, x^z-1) = 1</th></tr>${rows}</table>`;
}

function doCertify() {
  try {
    $("certOut").innerHTML = renderCertificate(JSON.parse(certify($("codeText").value)));
  } catch (e) {
    showError($("certOut"), e);
  }
}

function doConstruct() {
  const out = $("constructOut");
  out.textContent = "searching...";
  setTimeout(() => {
    try {
      const res = JSON.parse(construct(num("cGamma"), num("cKappa"), num("cZ"), num("cGirth"), num("cSeed")));
      out.innerHTML = `<p>Found a code with girth ${res.code.girth}, N = ${res.code.n}, rate ${res.code.rate}.
        <button id="useCode">Use in editor</button></p><pre>${res.file}</pre>`;
      $("useCode").onclick = () => {
        $("codeText").value = res.file;
        doCertify();
      };
    } catch (e) {
      showError(out, e);
    }
  }, 10);
}

function drawPlot(points) {
  const cv = $("plot");
  const ctx = cv.getContext("2d");
  const W = cv.width, H = cv.height, L = 60, R = 20, T = 20, B = 40;
  ctx.clearRect(0, 0, W, H);
  ctx.font = "12px sans-serif";
  ctx.fillStyle = "#222";
  ctx.strokeStyle = "#222";
  if (points.length === 0) return;
  const ps = points.map((r) => r.p);
  const xmin = Math.min(...ps), xmax = Math.max(...ps) > xmin ? Math.max(...ps) : xmin + 0.01;
  const floor = 0.5 / Math.max(...points.map((r) => r.trials));
  const vals = points.flatMap((r) => [r.fer_fc, r.fer_msc]).map((v) => Math.max(v, floor));
  const ymin = Math.floor(Math.log10(Math.min(...vals))), ymax = 0;
  const X = (p) => L + ((p - xmin) / (xmax - xmin)) * (W - L - R);
  const Y = (v) => T + ((ymax - Math.log10(Math.max(v, floor))) / (ymax - ymin || 1)) * (H - T - B);
  ctx.beginPath();
  ctx.moveTo(L, T);
  ctx.lineTo(L, H - B);
  ctx.lineTo(W - R, H - B);
  ctx.stroke();
  for (let e = ymin; e <= ymax; e++) {
    ctx.fillText(`1e${e}`, 8, Y(10 ** e) + 4);
    ctx.strokeStyle = "#eee";
    ctx.beginPath();
    ctx.moveTo(L, Y(10 ** e));
    ctx.lineTo(W - R, Y(10 ** e));
    ctx.stroke();
  }
  ctx.strokeStyle = "#222";
  points.forEach((r) => ctx.fillText(r.p.toFixed(3), X(r.p) - 14, H - B + 16));
  ctx.fillText("transition probability p", W / 2 - 60, H - 6);
  const curve = (key, width, dash, color) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.setLineDash(dash);
    ctx.beginPath();
    points.forEach((r, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, X(r.p), Y(r[key])));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.lineWidth = 1;
  };
  curve("fer_fc", 3, [], "#1f4e99");
  curve("fer_msc", 2, [4, 4], "#c0392b");
  ctx.fillStyle = "#1f4e99";
  ctx.fillText("FC (bold)", W - R - 130, T + 12);
  ctx.fillStyle = "#c0392b";
  ctx.fillText("MSC (dotted)", W - R - 130, T + 28);
}

function renderTable(points) {
  const rows = points
    .map((r) => `<tr><td>${r.p.toFixed(3)}</td><td>${r.fer_fc.toFixed(4)}</td><td>${r.fer_msc.toFixed(4)}</td>` +
      `<td>${r.skr_fc.toFixed(4)}</td><td>${r.skr_msc.toFixed(4)}</td><td>${r.mean_iters.toFixed(2)}</td></tr>`)
    .join("");
  return `<table><tr><th>p</th><th>FER FC</th><th>FER MSC</th><th>SKR FC</th><th>SKR MSC</th><th>mean iters</th></tr>${rows}</table>`;
}

function doRun() {
  const text = $("codeText").value;
  const from = num("pFrom"), to = num("pTo"), step = num("pStep");
  if (!(step > 0) || to < from) {
    $("simOut").innerHTML = `<p class="no">need step > 0 and to >= from</p>`;
    return;
  }
  const grid = [];
  for (let p = from; p <= to + 1e-9; p += step) grid.push(Math.round(p * 1e6) / 1e6);
  const points = [];
  $("run").disabled = true;
  const next = (k) => {
    if (k >= grid.length) {
      $("run").disabled = false;
      return;
    }
    $("simOut").innerHTML = `<p>simulating p = ${grid[k]} (${k + 1}/${grid.length})...</p>` + renderTable(points);
    setTimeout(() => {
      try {
        points.push(JSON.parse(simulatePoint(text, grid[k], num("trials"), 1, num("iters"))));
      } catch (e) {
        showError($("simOut"), e);
        $("run").disabled = false;
        return;
      }
      drawPlot(points);
      $("simOut").innerHTML = renderTable(points);
      next(k + 1);
    }, 10);
  };
  next(0);
}

async function main() {
  await init();
  $("status").textContent = "Ready. Simulation runs on the main thread; keep trial counts modest.";
  $("load").onclick = () => {
    $("codeText").value = shippedCode($("shipped").value);
    $("certOut").innerHTML = "";
  };
  $("certify").onclick = doCertify;
  $("construct").onclick = doConstruct;
  $("run").onclick = doRun;
  $("codeText").value = shippedCode("C1");
}

main().catch((e) => showError($("status"), e));
