/**
 * Typed client for the /v1 API. Every error becomes an ApiError carrying
 * the server's stable machine code.
 */

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface GrantInfo {
  grant_id: string;
  patient: string;
  requester: string;
  scope: string[];
  granted_at: number;
  expires_at: number | null;
  permanent: boolean;
  revoked: boolean;
  tx_hash?: string;
}

export interface RecordInfo {
  record_id: string;
  patient: string;
  author: string;
  kind: string;
  content_address: string;
  media_type: string;
  created_at: number;
  tx_hash: string;
  height: number;
  tx_index: number;
}

export interface AccountInfo {
  address: string;
  balance: number;
  nonce: number;
  fee: number;
}

export interface ConsentEventInfo {
  slot: number;
  action: string;
  grant_id: string;
  tx_hash: string;
}

export interface ProofInfo {
  height: number;
  tx_index: number;
  leaf: string;
  tx_root: string;
  siblings: { hash: string; right: boolean }[];
}

export class ApiClient {
  token: string | null = null;

  constructor(
    public baseUrl: string,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "HTTP_ERROR";
      let message = `${response.status}`;
      try {
        const parsed = (await response.json()) as { error?: { code: string; message: string } };
        if (parsed.error) {
          code = parsed.error.code;
          message = parsed.error.message;
        }
      } catch {
        // non-JSON error body: keep the generic code
      }
      throw new ApiError(response.status, code, message);
    }
    return response.json();
  }

  private async requestBytes(path: string): Promise<Uint8Array> {
    const headers: Record<string, string> = {};
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, { headers });
    if (!response.ok) {
      const parsed = (await response.json()) as { error?: { code: string; message: string } };
      throw new ApiError(response.status, parsed.error?.code ?? "HTTP_ERROR",
                         parsed.error?.message ?? `${response.status}`);
    }
    return new Uint8Array(await response.arrayBuffer());
  }

  registerEntity(txHex: string) {
    return this.request("POST", "/v1/entities", { tx: txHex }) as Promise<{
      entity_id: string;
      tx_hash: string;
    }>;
  }

  challenge(address: string) {
    return this.request("GET", `/v1/sessions/challenge?address=${address}`) as Promise<{
      challenge: string;
    }>;
  }

  async openSession(address: string, signatureHex: string) {
    const session = (await this.request("POST", "/v1/sessions", {
      address,
      signature: signatureHex,
    })) as { token: string; entity_id: string; role: string };
    this.token = session.token;
    return session;
  }

  account(addressHex: string) {
    return this.request("GET", `/v1/accounts/${addressHex}`) as Promise<AccountInfo>;
  }

  grantConsent(txHex: string) {
    return this.request("POST", "/v1/consents", { tx: txHex }) as Promise<GrantInfo>;
  }

  revokeConsent(grantId: string, txHex: string) {
    return this.request("DELETE", `/v1/consents/${grantId}`, { tx: txHex }) as Promise<GrantInfo>;
  }

  consentLog(patientId: string) {
    return this.request("GET", `/v1/patients/${patientId}/consents`) as Promise<{
      events: ConsentEventInfo[];
      grants: GrantInfo[];
    }>;
  }

  incomingGrants() {
    return this.request("GET", "/v1/grants/incoming") as Promise<{ grants: GrantInfo[] }>;
  }

  appendRecord(txHex: string, payloadB64: string, mediaType: string) {
    return this.request("POST", "/v1/records", {
      tx: txHex,
      payload_b64: payloadB64,
      media_type: mediaType,
    }) as Promise<RecordInfo>;
  }

  listRecords(patientId: string) {
    return this.request("GET", `/v1/patients/${patientId}/records`) as Promise<{
      records: RecordInfo[];
    }>;
  }

  recordContent(recordId: string) {
    return this.requestBytes(`/v1/records/${recordId}/content`);
  }

  proof(height: number, txIndex: number) {
    return this.request("GET", `/v1/chain/blocks/${height}/proof/${txIndex}`) as Promise<ProofInfo>;
  }

  chainHead() {
    return this.request("GET", "/v1/chain/head") as Promise<{ height: number; hash: string }>;
  }

  predict(disease: string, features: Record<string, string | number>) {
    return this.request("POST", `/v1/predict/${disease}`, { features }) as Promise<{
      label: string;
      scores: Record<string, number>;
      model_version: string;
    }>;
  }
}
