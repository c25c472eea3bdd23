/** JSON payloads of the tracking service API. The UI renders these
 * verbatim and never recomputes outcomes client-side. */

export interface PriceValueJson {
  amount: string;
  currency: string;
  range?: [string, string];
}

export interface OutcomeJson {
  code: "OK" | "PAGE_UNAVAILABLE" | "NO_PRICE" | "MANY_PRICES";
  from_scratch: boolean;
  value?: PriceValueJson;
  candidates?: PriceValueJson[];
}

export interface PageSummary {
  id: string;
  url: string;
  title: string | null;
  latest_outcome: string | null;
  latest_value: PriceValueJson | null;
  checked_at: string | null;
}

export interface HistoryEntry {
  timestamp: string;
  code: string;
  from_scratch: boolean;
  value?: PriceValueJson;
  candidates?: PriceValueJson[];
}

export interface KitEntry {
  expression: string;
  currency: string;
  created_at: string;
}

/** Renders a price value exactly as the API spelled it. */
export function formatValue(value: PriceValueJson): string {
  if (value.range) {
    return `${value.range[0]}–${value.range[1]} ${value.currency}`;
  }
  return `${value.amount} ${value.currency}`;
}
