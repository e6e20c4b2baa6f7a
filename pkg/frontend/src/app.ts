/**
 * Portal shell: paste a keystore, open a session via challenge-response,
 * then route to the patient or clinician view by the entity's role.
 */

import { ApiClient, ApiError } from "./api.js";
import { DoctorPortal } from "./doctor.js";
import { PatientPortal, RegistrationView } from "./patient.js";
import { TxConfirmDialog } from "./txconfirm.js";
import { KeystoreError, decryptKeystore, parseKeystore, signMessage } from "./wallet.js";

export function mountApp(root: HTMLElement, baseUrl = ""): void {
  root.innerHTML = `
    <main class="medledger-app">
      <h1>medledger portal</h1>
      <form class="login-form">
        <label>API base URL <input name="base" value="${baseUrl || "http://127.0.0.1:8540"}" /></label>
        <label>keystore file contents
          <textarea name="keystore" rows="7" placeholder="address = ..."></textarea>
        </label>
        <label>passphrase <input name="passphrase" type="password" /></label>
        <label>register as (first login only)
          <select name="role">
            <option>Patient</option><option>Doctor</option><option>Hospital</option>
            <option>PathLab</option><option>Pharmacy</option>
          </select>
        </label>
        <button type="submit">Open session</button>
        <p class="login-status"></p>
      </form>
      <div class="portal"></div>
      <div class="dialog-root"></div>
    </main>`;

  const form = root.querySelector<HTMLFormElement>(".login-form")!;
  const status = root.querySelector<HTMLElement>(".login-status")!;
  const portalRoot = root.querySelector<HTMLElement>(".portal")!;
  const dialogRoot = root.querySelector<HTMLElement>(".dialog-root")!;

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const base = form.querySelector<HTMLInputElement>('[name="base"]')!.value.trim();
    const keystoreText = form.querySelector<HTMLTextAreaElement>('[name="keystore"]')!.value;
    const passphrase = form.querySelector<HTMLInputElement>('[name="passphrase"]')!.value;
    const role = form.querySelector<HTMLSelectElement>('[name="role"]')!.value;
    const api = new ApiClient(base);
    try {
      const keystore = parseKeystore(keystoreText);
      const dialog = new TxConfirmDialog(keystore, dialogRoot);
      let session;
      try {
        const { challenge } = await api.challenge(keystore.address);
        const priv = await decryptKeystore(keystore, passphrase);
        const signature = signMessage(priv, hexToBytes(challenge));
        priv.fill(0);
        session = await api.openSession(keystore.address, bytesToHex(signature));
      } catch (e) {
        if (e instanceof ApiError && e.code === "UNKNOWN_ADDRESS") {
          status.textContent = "address not registered yet; fill the registration form";
          const registration = new RegistrationView(api, keystore, dialog, role);
          registration.onRegistered = () => {
            status.textContent = "registered; log in again to open your portal";
          };
          registration.render(portalRoot);
          return;
        }
        throw e;
      }
      status.textContent = `session open as ${session.entity_id} (${session.role})`;
      if (session.role === "Patient") {
        await new PatientPortal(api, keystore, dialog, session.entity_id).render(portalRoot);
      } else {
        const withPredictors = session.role === "Doctor";
        await new DoctorPortal(api, keystore, dialog, session.entity_id, withPredictors)
          .render(portalRoot);
      }
    } catch (e) {
      status.textContent =
        e instanceof KeystoreError || e instanceof ApiError ? e.message : `login failed: ${e}`;
    }
  });
}

function hexToBytes(hex: string): Uint8Array {
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  return out;
}

function bytesToHex(bytes: Uint8Array): string {
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

declare global {
  interface Window {
    medledgerMount?: typeof mountApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("medledger-root")) {
  mountApp(document.getElementById("medledger-root")!);
}
