// Built with `wasm-pack build --target web --out-dir www/pkg` from crates/demo.
import init, { Demo } from "./pkg/creams_demo.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function log(line) {
  $("log").textContent = line + "\n" + $("log").textContent;
}

function draw(id, pixels, w, h) {
  const canvas = $(id);
  canvas.width = w;
  canvas.height = h;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(w, h);
  for (let i = 0; i < pixels.length; i++) {
    img.data[4 * i] = img.data[4 * i + 1] = img.data[4 * i + 2] = pixels[i];
    img.data[4 * i + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
}

function guarded(fn) {
  return async () => {
    try {
      await fn();
    } catch (e) {
      log("error: " + e);
    }
  };
}

$("encrypt").onclick = guarded(async () => {
  const seed = BigInt($("seed").value || 0);
  const file = $("upload").files[0];
  if (demo) demo.free();
  demo = file
    ? Demo.from_pgm(new Uint8Array(await file.arrayBuffer()), seed)
    : new Demo($("image").value, Number($("size").value), seed);
  const [w, h] = [demo.width(), demo.height()];
  draw("c-original", demo.original(), w, h);
  draw("c-encrypted", demo.encrypted(), w, h);
  const p = demo.encrypted_psnr().toFixed(2);
  $("cap-encrypted").textContent = `stored in the cloud, ${p} dB`;
  log(`encrypted ${w}x${h}, PSNR of the stored image ${p} dB`);
  $("share").disabled = $("trace").disabled = false;
});

$("share").onclick = guarded(() => {
  const user = Number($("user").value);
  const r = JSON.parse(demo.share(user, Number($("sigma_w").value)));
  draw("c-copy", demo.copy(user), demo.width(), demo.height());
  $("cap-copy").textContent = `user ${user}, ${r.psnr_db.toFixed(2)} dB`;
  log(`user ${user} copy: ${r.psnr_db.toFixed(3)} dB, fingerprint ${r.fingerprint}`);
});

$("trace").onclick = guarded(() => {
  const r = JSON.parse(demo.trace(Number($("leaker").value), Number($("sigma_n").value)));
  const d = r.distances.map((x) => `user ${x.user}: ${x.distance}`).join(", ");
  const who = r.accused === null ? "no single user" : `user ${r.accused}`;
  log(`leak of user ${r.leaker} (${r.leak_psnr_db.toFixed(2)} dB) traced to ${who}; distances ${d}`);
});

await init();
log("ready");
