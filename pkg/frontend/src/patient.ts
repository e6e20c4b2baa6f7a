/**
 * Patient portal: register, browse own records, grant/revoke consent with
 * a duration picker, and inspect the audit log. Every mutation goes
 * through the confirmation dialog; state re-renders from the server after
 * inclusion.
 */

import { ApiClient, GrantInfo } from "./api.js";
import {
  RecordKind,
  TxKind,
  ZERO_HASH,
  encodeTx,
  grantBody,
  registerBody,
  revokeBody,
} from "./encoding.js";
import { REGISTRATION_FIELDS, RECORD_KINDS, validateAadhar, validateRegistration } from "./forms.js";
import { fromHex, toHex } from "./keccak.js";
import { TxConfirmDialog } from "./txconfirm.js";
import { Keystore } from "./wallet.js";

export class RegistrationView {
  onRegistered: ((entityId: string) => void) | null = null;

  constructor(
    private api: ApiClient,
    private keystore: Keystore,
    private dialog: TxConfirmDialog,
    private role: string = "Patient",
  ) {}

  render(container: HTMLElement): void {
    const fields = REGISTRATION_FIELDS[this.role];
    container.innerHTML = `
      <form class="register-form">
        <h2>Register as ${this.role}</h2>
        ${fields
          .map(
            (f) => `
          <label>${f.name}
            <input name="${f.name}" placeholder="${f.placeholder}" />
            <span class="field-error" data-for="${f.name}" hidden></span>
          </label>`,
          )
          .join("")}
        <button type="submit" class="register-submit">Register</button>
        <p class="register-status"></p>
      </form>`;
    const form = container.querySelector<HTMLFormElement>(".register-form")!;
    const submit = form.querySelector<HTMLButtonElement>(".register-submit")!;
    const status = form.querySelector<HTMLElement>(".register-status")!;

    const refreshValidity = () => {
      const values = this.values(form);
      if (this.role === "Patient") {
        const aadharError = form.querySelector<HTMLElement>('[data-for="aadhar"]')!;
        const problem = values["aadhar"] ? validateAadhar(values["aadhar"]) : null;
        aadharError.hidden = problem === null;
        aadharError.textContent = problem ?? "";
        submit.disabled = problem !== null;
      }
    };
    form.querySelector<HTMLInputElement>('[name="aadhar"]')
      ?.addEventListener("input", refreshValidity);

    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const values = this.values(form);
      const problems = validateRegistration(this.role, values);
      for (const span of form.querySelectorAll<HTMLElement>(".field-error")) {
        const name = span.dataset["for"]!;
        span.hidden = !(name in problems);
        span.textContent = problems[name] ?? "";
      }
      if (Object.keys(problems).length > 0) return;

      const account = await this.api.account(this.keystore.address);
      const outcome = await this.dialog.confirm(
        {
          sender: fromHex(this.keystore.address),
          nonce: account.nonce,
          kind: TxKind.Register,
          body: registerBody(this.role, values),
          payloadHash: ZERO_HASH,
          fee: account.fee,
          publicKey: this.keystore.publicKey,
        },
        {
          action: `Register ${this.role} "${values["name"]}"`,
          fee: account.fee,
          balance: account.balance,
        },
      );
      if (!outcome.approved || !outcome.signed) {
        status.textContent = "registration cancelled";
        return;
      }
      try {
        const created = await this.api.registerEntity(toHex(encodeTx(outcome.signed)));
        status.textContent = `registered as ${created.entity_id} (tx ${created.tx_hash.slice(0, 16)})`;
        this.onRegistered?.(created.entity_id);
      } catch (e) {
        status.textContent = `registration failed: ${e}`;
      }
    });
  }

  private values(form: HTMLFormElement): Record<string, string> {
    const out: Record<string, string> = {};
    for (const input of form.querySelectorAll<HTMLInputElement>("input[name]")) {
      out[input.name] = input.value;
    }
    return out;
  }
}

export class PatientPortal {
  constructor(
    private api: ApiClient,
    private keystore: Keystore,
    private dialog: TxConfirmDialog,
    private entityId: string,
  ) {}

  async render(container: HTMLElement): Promise<void> {
    const account = await this.api.account(this.keystore.address);
    const [records, log] = await Promise.all([
      this.api.listRecords(this.entityId),
      this.api.consentLog(this.entityId),
    ]);
    container.innerHTML = `
      <section class="patient-portal">
        <h2>Patient ${this.entityId}</h2>
        <p>balance <span class="balance">${account.balance}</span> units
           (fee ${account.fee}/tx)</p>

        <h3>My records</h3>
        <ul class="records">
          ${records.records
            .map(
              (r) => `<li>${r.record_id} [${r.kind}] by ${r.author} at slot ${r.created_at}
                      <code>${r.content_address.slice(0, 16)}</code></li>`,
            )
            .join("") || "<li>none yet</li>"}
        </ul>

        <h3>Grant consent</h3>
        <form class="grant-form">
          <label>requester entity id <input name="requester" placeholder="doc-1" /></label>
          <fieldset class="scope">
            ${RECORD_KINDS.map(
              (k) => `<label><input type="checkbox" name="scope" value="${k}" />${k}</label>`,
            ).join("")}
          </fieldset>
          <label>duration
            <select name="duration" class="duration-picker">
              <option value="50">50 slots</option>
              <option value="100" selected>100 slots</option>
              <option value="1000">1000 slots</option>
              <option value="permanent">permanent (emergency)</option>
            </select>
          </label>
          <button type="submit">Grant</button>
          <p class="grant-status"></p>
        </form>

        <h3>Active grants</h3>
        <ul class="grants">
          ${log.grants
            .map(
              (g) => `<li data-grant="${g.grant_id}">${g.grant_id}: ${g.requester}
                      [${g.scope.join(", ")}] ${g.permanent ? "permanent" : `until slot ${g.expires_at}`}
                      ${g.revoked ? "(revoked)" : `<button class="revoke" data-grant="${g.grant_id}">Revoke</button>`}
                      </li>`,
            )
            .join("") || "<li>none</li>"}
        </ul>

        <h3>Audit log</h3>
        <ol class="audit">
          ${log.events
            .map(
              (e) => `<li>slot ${e.slot}: ${e.action} ${e.grant_id}
                      <code>tx ${e.tx_hash.slice(0, 16)}</code></li>`,
            )
            .join("") || "<li>empty</li>"}
        </ol>
      </section>`;

    container
      .querySelector<HTMLFormElement>(".grant-form")!
      .addEventListener("submit", (event) => {
        event.preventDefault();
        void this.grant(container);
      });
    for (const button of container.querySelectorAll<HTMLButtonElement>(".revoke")) {
      button.addEventListener("click", () => {
        void this.revoke(container, button.dataset["grant"]!);
      });
    }
  }

  private async grant(container: HTMLElement): Promise<void> {
    const form = container.querySelector<HTMLFormElement>(".grant-form")!;
    const status = form.querySelector<HTMLElement>(".grant-status")!;
    const requester = form.querySelector<HTMLInputElement>('[name="requester"]')!.value.trim();
    const scope: RecordKind[] = [];
    for (const box of form.querySelectorAll<HTMLInputElement>('[name="scope"]:checked')) {
      scope.push(RecordKind[box.value as keyof typeof RecordKind]);
    }
    const durationRaw = form.querySelector<HTMLSelectElement>('[name="duration"]')!.value;
    const duration = durationRaw === "permanent" ? null : parseInt(durationRaw, 10);
    if (!requester || scope.length === 0) {
      status.textContent = "requester and at least one scope kind are required";
      return;
    }
    const account = await this.api.account(this.keystore.address);
    const outcome = await this.dialog.confirm(
      {
        sender: fromHex(this.keystore.address),
        nonce: account.nonce,
        kind: TxKind.GrantConsent,
        body: grantBody(this.entityId, requester, scope, duration),
        payloadHash: ZERO_HASH,
        fee: account.fee,
        publicKey: this.keystore.publicKey,
      },
      {
        action: `Grant ${requester} access to ${scope.map((k) => RecordKind[k]).join(", ")} ` +
                (duration === null ? "permanently (revocable)" : `for ${duration} slots`),
        fee: account.fee,
        balance: account.balance,
      },
    );
    if (!outcome.approved || !outcome.signed) {
      status.textContent = "grant cancelled";
      return;
    }
    try {
      const grant: GrantInfo = await this.api.grantConsent(toHex(encodeTx(outcome.signed)));
      status.textContent = `granted: ${grant.grant_id} (tx ${grant.tx_hash?.slice(0, 16)})`;
      await this.render(container); // refresh balance, grants, audit from server
    } catch (e) {
      status.textContent = `grant failed: ${e}`;
    }
  }

  private async revoke(container: HTMLElement, grantId: string): Promise<void> {
    const account = await this.api.account(this.keystore.address);
    const outcome = await this.dialog.confirm(
      {
        sender: fromHex(this.keystore.address),
        nonce: account.nonce,
        kind: TxKind.RevokeConsent,
        body: revokeBody(grantId),
        payloadHash: ZERO_HASH,
        fee: account.fee,
        publicKey: this.keystore.publicKey,
      },
      { action: `Revoke ${grantId}`, fee: account.fee, balance: account.balance },
    );
    if (!outcome.approved || !outcome.signed) return;
    await this.api.revokeConsent(grantId, toHex(encodeTx(outcome.signed)));
    await this.render(container);
  }
}
