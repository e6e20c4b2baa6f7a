/**
 * Form schemas: registration field lists per role and the predictor field
 * lists per disease, with placeholder hints matching the documented
 * encodings. Field names map 1:1 onto the API request schemas, and the
 * client-side rules mirror the server's (the differential test pins
 * that).
 */

export interface FieldSpec {
  name: string;
  placeholder: string;
}

export const REGISTRATION_FIELDS: Record<string, FieldSpec[]> = {
  Patient: [
    { name: "name", placeholder: "full name" },
    { name: "phone", placeholder: "phone number" },
    { name: "location", placeholder: "city" },
    { name: "aadhar", placeholder: "12-digit number" },
    { name: "email", placeholder: "email" },
    { name: "medical_history", placeholder: "prior conditions" },
    { name: "symptoms", placeholder: "current symptoms" },
    { name: "age", placeholder: "eg. 34" },
  ],
  Doctor: [
    { name: "name", placeholder: "full name" },
    { name: "phone", placeholder: "phone number" },
    { name: "location", placeholder: "city" },
    { name: "email", placeholder: "email" },
    { name: "registration_number", placeholder: "medical registration no." },
    { name: "registration_council", placeholder: "council" },
    { name: "specialization", placeholder: "eg. cardiology" },
    { name: "experience_years", placeholder: "years of practice" },
  ],
  Hospital: [
    { name: "name", placeholder: "hospital name" },
    { name: "email", placeholder: "email" },
    { name: "phone", placeholder: "phone number" },
    { name: "address", placeholder: "street address" },
    { name: "year_of_establishment", placeholder: "eg. 1962" },
  ],
  PathLab: [
    { name: "name", placeholder: "lab name" },
    { name: "email", placeholder: "email" },
    { name: "phone", placeholder: "phone number" },
  ],
  Pharmacy: [
    { name: "name", placeholder: "pharmacy name" },
    { name: "email", placeholder: "email" },
    { name: "phone", placeholder: "phone number" },
  ],
};

export const PREDICTOR_FIELDS: Record<string, FieldSpec[]> = {
  lungcancer: [
    { name: "gender", placeholder: "0/1" },
    { name: "age", placeholder: "eg. 34" },
    { name: "smoking", placeholder: "1-no, 2-yes" },
    { name: "yellow_fingers", placeholder: "1/2" },
    { name: "anxiety", placeholder: "1/2" },
    { name: "peer_pressure", placeholder: "1/2" },
    { name: "chronic_disease", placeholder: "1/2" },
    { name: "fatigue", placeholder: "1/2" },
    { name: "allergy", placeholder: "1/2" },
    { name: "wheezing", placeholder: "1/2" },
    { name: "alcohol_consuming", placeholder: "1/2" },
    { name: "coughing", placeholder: "1/2" },
    { name: "shortness_of_breath", placeholder: "1/2" },
    { name: "swallowing_difficulty", placeholder: "1/2" },
    { name: "chest_pain", placeholder: "1/2" },
  ],
  kidney: [
    { name: "age", placeholder: "eg. 34" },
    { name: "bp", placeholder: "blood pressure" },
    { name: "sg", placeholder: "specific gravity" },
    { name: "al", placeholder: "albumin" },
    { name: "su", placeholder: "sugar" },
    { name: "rbc", placeholder: "0-normal, 1-abnormal" },
    { name: "pc", placeholder: "0-normal, 1-abnormal" },
    { name: "pcc", placeholder: "0/1" },
    { name: "ba", placeholder: "0/1" },
    { name: "bgr", placeholder: "blood glucose random" },
    { name: "bu", placeholder: "blood urea" },
    { name: "sc", placeholder: "serum creatinine" },
    { name: "sod", placeholder: "sodium" },
    { name: "pot", placeholder: "potassium" },
    { name: "hemo", placeholder: "hemoglobin" },
    { name: "pcv", placeholder: "packed cell volume" },
    { name: "wc", placeholder: "white cell count" },
    { name: "rc", placeholder: "red cell count" },
    { name: "htn", placeholder: "0/1" },
    { name: "dm", placeholder: "0/1" },
    { name: "cad", placeholder: "0/1" },
    { name: "appet", placeholder: "0-good, 1-poor" },
    { name: "pe", placeholder: "0/1" },
    { name: "ane", placeholder: "0/1" },
  ],
  diabetes: [
    { name: "Pregnancies", placeholder: "eg. 0" },
    { name: "Glucose", placeholder: "85..197" },
    { name: "BloodPressure", placeholder: "50..98" },
    { name: "SkinThickness", placeholder: "29..45" },
    { name: "Insulin", placeholder: "2/3 digit" },
    { name: "BMI", placeholder: "2 digit" },
    { name: "Diabetes Pedegree Function", placeholder: "eg. 0.627" },
    { name: "Age", placeholder: "eg. 34" },
  ],
  maternalhealth: [
    { name: "Age", placeholder: "eg. 34" },
    { name: "SystolicBP", placeholder: "mmHg" },
    { name: "DiastolicBP", placeholder: "mmHg" },
    { name: "BS", placeholder: "blood sugar" },
    { name: "BodyTemp", placeholder: "deg F" },
    { name: "Heart Rate", placeholder: "bpm" },
  ],
  heart: [
    { name: "age", placeholder: "eg. 34" },
    { name: "anaemia", placeholder: "0/1" },
    { name: "creatinine_phosphokinase", placeholder: "3/4 digit" },
    { name: "diabetes", placeholder: "0/1" },
    { name: "ejection_fraction", placeholder: "10..40" },
    { name: "high_blood_pressure", placeholder: "0/1" },
    { name: "platelets", placeholder: "eg. 227000" },
    { name: "serum_creatinine", placeholder: "eg. 1.9" },
    { name: "serum_sodium", placeholder: "110..310" },
    { name: "sex", placeholder: "0/1" },
    { name: "smoking", placeholder: "0-no, 1-yes" },
    { name: "time", placeholder: "follow-up days" },
  ],
};

export const RECORD_KINDS = [
  "Report",
  "Prescription",
  "TestReferral",
  "Treatment",
  "Comment",
  "Media",
] as const;

export function validateAadhar(value: string): string | null {
  const v = value.trim();
  if (!/^\d{12}$/.test(v)) {
    return "aadhar must be exactly 12 decimal digits";
  }
  return null;
}

/** Mirror of the server's registration rules; null means acceptable. */
export function validateRegistration(
  role: string,
  values: Record<string, string>,
): Record<string, string> {
  const problems: Record<string, string> = {};
  for (const field of REGISTRATION_FIELDS[role] ?? []) {
    if (!(values[field.name] ?? "").trim()) {
      problems[field.name] = `missing required field: ${field.name}`;
    }
  }
  if (role === "Patient" && !problems["aadhar"]) {
    const problem = validateAadhar(values["aadhar"] ?? "");
    if (problem) problems["aadhar"] = problem;
  }
  return problems;
}

export function validatePredictorInput(
  disease: string,
  values: Record<string, string>,
): Record<string, string> {
  const problems: Record<string, string> = {};
  for (const field of PREDICTOR_FIELDS[disease] ?? []) {
    const raw = (values[field.name] ?? "").trim();
    if (!raw) {
      problems[field.name] = `missing field: ${field.name}`;
    } else if (Number.isNaN(Number(raw))) {
      problems[field.name] = `${field.name} must be numeric`;
    }
  }
  return problems;
}
