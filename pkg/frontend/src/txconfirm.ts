/**
 * The transaction confirmation dialog: every signed mutation passes
 * through here, and nowhere else. It shows the decoded action, the fee,
 * and the current balance; on approval it decrypts the keystore with the
 * passphrase and signs client-side. Rejecting (or a wrong passphrase)
 * sends nothing anywhere.
 */

import { SignedTx, UnsignedTx } from "./encoding.js";
import { Keystore, KeystoreError, decryptKeystore, signTx } from "./wallet.js";

export interface ConfirmContext {
  action: string; // human-readable decoded action
  fee: number;
  balance: number;
}

export interface ConfirmOutcome {
  approved: boolean;
  signed?: SignedTx;
}

export class TxConfirmDialog {
  constructor(
    private keystore: Keystore,
    private root: HTMLElement,
  ) {}

  /**
   * Render the dialog and resolve once the user approves (with a working
   * passphrase) or rejects. A wrong passphrase shows an inline error and
   * keeps the dialog open; nothing is signed and nothing is sent.
   */
  confirm(tx: UnsignedTx, context: ConfirmContext): Promise<ConfirmOutcome> {
    const dialog = document.createElement("div");
    dialog.className = "tx-confirm";
    dialog.innerHTML = `
      <div class="tx-confirm-box" role="dialog" aria-label="Confirm transaction">
        <h3>Confirm transaction</h3>
        <p class="tx-action">${escapeHtml(context.action)}</p>
        <dl>
          <dt>Fee</dt><dd class="tx-fee">${context.fee} unit${context.fee === 1 ? "" : "s"}</dd>
          <dt>Current balance</dt><dd class="tx-balance">${context.balance} units</dd>
          <dt>Balance after</dt><dd class="tx-after">${context.balance - context.fee} units</dd>
        </dl>
        <label>Keystore passphrase
          <input type="password" class="tx-passphrase" autocomplete="off" />
        </label>
        <p class="tx-error" hidden></p>
        <div class="tx-buttons">
          <button class="tx-reject" type="button">Reject</button>
          <button class="tx-approve" type="button">Sign and submit</button>
        </div>
      </div>`;
    this.root.appendChild(dialog);

    const passphraseInput = dialog.querySelector<HTMLInputElement>(".tx-passphrase")!;
    const errorLine = dialog.querySelector<HTMLElement>(".tx-error")!;
    const approve = dialog.querySelector<HTMLButtonElement>(".tx-approve")!;
    const reject = dialog.querySelector<HTMLButtonElement>(".tx-reject")!;

    return new Promise<ConfirmOutcome>((resolve) => {
      reject.addEventListener("click", () => {
        dialog.remove();
        resolve({ approved: false });
      });
      approve.addEventListener("click", async () => {
        approve.disabled = true;
        try {
          const priv = await decryptKeystore(this.keystore, passphraseInput.value);
          const signed = signTx(priv, tx);
          priv.fill(0);
          dialog.remove();
          resolve({ approved: true, signed });
        } catch (e) {
          approve.disabled = false;
          errorLine.hidden = false;
          errorLine.textContent =
            e instanceof KeystoreError ? e.message : `signing failed: ${e}`;
        }
      });
    });
  }
}

function escapeHtml(s: string): string {
  return s.replace(/[&<>"']/g, (ch) => `&#${ch.charCodeAt(0)};`);
}
