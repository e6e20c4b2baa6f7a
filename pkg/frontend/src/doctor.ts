/**
 * Clinician portal (doctors; hospitals, labs, and pharmacies get the same
 * view minus predictors): consenting patients from the incoming-grants
 * feed, record browsing with client-side hash and inclusion-proof
 * verification, prescription/referral submission, and the predictor
 * forms.
 *
 * A record whose fetched bytes fail verification renders a tamper
 * warning, never the content.
 */

import { ApiClient, RecordInfo } from "./api.js";
import {
  RecordKind,
  TxKind,
  encodeTx,
  recordBody,
  txLeaf,
  verifyMerkleProof,
  bytesEqual,
} from "./encoding.js";
import { PREDICTOR_FIELDS, validatePredictorInput } from "./forms.js";
import { fromHex, keccak256, toHex } from "./keccak.js";
import { TxConfirmDialog } from "./txconfirm.js";
import { Keystore } from "./wallet.js";

const RECORD_TX_KIND: Record<string, TxKind> = {
  Report: TxKind.AppendRecord,
  Prescription: TxKind.Prescription,
  TestReferral: TxKind.Referral,
  Treatment: TxKind.Treatment,
  Comment: TxKind.Comment,
  Media: TxKind.AppendRecord,
};

export class DoctorPortal {
  constructor(
    private api: ApiClient,
    private keystore: Keystore,
    private dialog: TxConfirmDialog,
    private entityId: string,
    private withPredictors: boolean = true,
  ) {}

  async render(container: HTMLElement): Promise<void> {
    const incoming = await this.api.incomingGrants();
    const patients = [...new Set(incoming.grants.map((g) => g.patient))];
    container.innerHTML = `
      <section class="doctor-portal">
        <h2>${this.entityId}</h2>
        <h3>Consenting patients</h3>
        <ul class="patients">
          ${patients
            .map(
              (p) => `<li>${p}
                <button class="open-records" data-patient="${p}">Open records</button></li>`,
            )
            .join("") || "<li>no active consents</li>"}
        </ul>
        <div class="patient-records"></div>

        <h3>Submit a record</h3>
        <form class="record-form">
          <label>patient <input name="patient" placeholder="pat-1" /></label>
          <label>kind
            <select name="kind">
              ${Object.keys(RECORD_TX_KIND)
                .map((k) => `<option value="${k}">${k}</option>`)
                .join("")}
            </select>
          </label>
          <label>text <textarea name="payload"></textarea></label>
          <button type="submit">Submit</button>
          <p class="record-status"></p>
        </form>

        ${this.withPredictors ? this.predictorHtml() : ""}
      </section>`;

    for (const button of container.querySelectorAll<HTMLButtonElement>(".open-records")) {
      button.addEventListener("click", () => {
        void this.openRecords(container, button.dataset["patient"]!);
      });
    }
    container
      .querySelector<HTMLFormElement>(".record-form")!
      .addEventListener("submit", (event) => {
        event.preventDefault();
        void this.submitRecord(container);
      });
    if (this.withPredictors) {
      this.wirePredictors(container);
    }
  }

  private async openRecords(container: HTMLElement, patient: string): Promise<void> {
    const target = container.querySelector<HTMLElement>(".patient-records")!;
    const listing = await this.api.listRecords(patient);
    target.innerHTML = `
      <h4>Records of ${patient}</h4>
      <ul>
        ${listing.records
          .map(
            (r) => `<li data-record="${r.record_id}">${r.record_id} [${r.kind}]
                    by ${r.author} <button class="view" data-record="${r.record_id}">View</button>
                    <div class="record-view" data-view="${r.record_id}"></div></li>`,
          )
          .join("") || "<li>none visible</li>"}
      </ul>`;
    for (const button of target.querySelectorAll<HTMLButtonElement>(".view")) {
      const record = listing.records.find((r) => r.record_id === button.dataset["record"])!;
      button.addEventListener("click", () => {
        void this.viewRecord(target, record);
      });
    }
  }

  /** Fetch content and verify: keccak(bytes) must equal the on-chain
   * content address, and the record's transaction must prove into its
   * block's tx_root. Anything else renders a tamper warning. */
  private async viewRecord(target: HTMLElement, record: RecordInfo): Promise<void> {
    const view = target.querySelector<HTMLElement>(`[data-view="${record.record_id}"]`)!;
    let content: Uint8Array;
    try {
      content = await this.api.recordContent(record.record_id);
    } catch (e) {
      view.innerHTML = `<p class="tamper-warning">content unavailable or corrupt: ${e}</p>`;
      return;
    }
    const digest = toHex(keccak256(content));
    if (digest !== record.content_address) {
      view.innerHTML = `<p class="tamper-warning">TAMPER WARNING: content hash
        ${digest.slice(0, 16)} does not match the on-chain address
        ${record.content_address.slice(0, 16)}</p>`;
      return;
    }
    let anchored = false;
    try {
      const proof = await this.api.proof(record.height, record.tx_index);
      anchored = verifyMerkleProof(
        fromHex(proof.leaf),
        proof.siblings.map((s) => ({ hash: fromHex(s.hash), right: s.right })),
        fromHex(proof.tx_root),
      );
    } catch {
      anchored = false;
    }
    if (!anchored) {
      view.innerHTML = `<p class="tamper-warning">TAMPER WARNING: inclusion proof
        for ${record.record_id} does not verify against the chain</p>`;
      return;
    }
    view.innerHTML = `<pre class="record-content"></pre>
      <p class="verified">hash and inclusion proof verified</p>`;
    view.querySelector("pre")!.textContent = new TextDecoder().decode(content);
  }

  private async submitRecord(container: HTMLElement): Promise<void> {
    const form = container.querySelector<HTMLFormElement>(".record-form")!;
    const status = form.querySelector<HTMLElement>(".record-status")!;
    const patient = form.querySelector<HTMLInputElement>('[name="patient"]')!.value.trim();
    const kindName = form.querySelector<HTMLSelectElement>('[name="kind"]')!.value;
    const text = form.querySelector<HTMLTextAreaElement>('[name="payload"]')!.value;
    if (!patient || !text) {
      status.textContent = "patient and text are required";
      return;
    }
    const payload = new TextEncoder().encode(text);
    const account = await this.api.account(this.keystore.address);
    const kind = RecordKind[kindName as keyof typeof RecordKind];
    const outcome = await this.dialog.confirm(
      {
        sender: fromHex(this.keystore.address),
        nonce: account.nonce,
        kind: RECORD_TX_KIND[kindName],
        body: recordBody(patient, kind, "report/text"),
        payloadHash: keccak256(payload),
        fee: account.fee,
        publicKey: this.keystore.publicKey,
      },
      {
        action: `Append ${kindName} for ${patient} (${payload.length} bytes)`,
        fee: account.fee,
        balance: account.balance,
      },
    );
    if (!outcome.approved || !outcome.signed) {
      status.textContent = "submission cancelled";
      return;
    }
    try {
      const created = await this.api.appendRecord(
        toHex(encodeTx(outcome.signed)),
        btoa(String.fromCharCode(...payload)),
        "report/text",
      );
      status.textContent = `recorded as ${created.record_id} (tx ${created.tx_hash.slice(0, 16)})`;
    } catch (e) {
      status.textContent = `submission failed: ${e}`;
    }
  }

  private predictorHtml(): string {
    return `
      <h3>Disease predictors</h3>
      <label>disease
        <select class="predict-disease">
          ${Object.keys(PREDICTOR_FIELDS)
            .map((d) => `<option value="${d}">${d}</option>`)
            .join("")}
        </select>
      </label>
      <form class="predict-form"></form>
      <div class="predict-result"></div>`;
  }

  private wirePredictors(container: HTMLElement): void {
    const select = container.querySelector<HTMLSelectElement>(".predict-disease")!;
    const form = container.querySelector<HTMLFormElement>(".predict-form")!;
    const result = container.querySelector<HTMLElement>(".predict-result")!;

    const renderForm = () => {
      const fields = PREDICTOR_FIELDS[select.value];
      form.innerHTML = `
        ${fields
          .map(
            (f) => `<label>${f.name}
              <input name="${f.name}" placeholder="${f.placeholder}" /></label>`,
          )
          .join("")}
        <button type="submit">Predict</button>
        <p class="predict-status"></p>`;
    };
    renderForm();
    select.addEventListener("change", renderForm);

    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const status = form.querySelector<HTMLElement>(".predict-status")!;
      const values: Record<string, string> = {};
      for (const input of form.querySelectorAll<HTMLInputElement>("input[name]")) {
        values[input.name] = input.value;
      }
      const problems = validatePredictorInput(select.value, values);
      if (Object.keys(problems).length > 0) {
        status.textContent = Object.values(problems)[0];
        return;
      }
      try {
        const prediction = await this.api.predict(select.value, values);
        result.innerHTML = `<p class="predict-label">${select.value}:
          <strong>${prediction.label}</strong> (model ${prediction.model_version})</p>
          <ul>${Object.entries(prediction.scores)
            .map(([c, s]) => `<li>${c}: ${s.toFixed(3)}</li>`)
            .join("")}</ul>`;
        status.textContent = "";
      } catch (e) {
        status.textContent = `prediction failed: ${e}`;
      }
    });
  }
}
