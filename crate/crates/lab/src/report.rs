//! Deterministic JSON rendering of audit reports.

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use vcnk_core::rational::format_rational;
use vcnk_core::{AuditReport, Quantity, Verdict};

pub fn quantity_value(q: &Quantity) -> Value {
    match q {
        Quantity::Exact(r) => Value::String(format_rational(r)),
        Quantity::Integer(n) => match n.to_i64() {
            Some(v) => Value::from(v),
            None => Value::String(n.to_string()),
        },
        Quantity::Float { value, tolerance } => json!({ "value": value, "tolerance": tolerance }),
        Quantity::Text(t) => Value::String(t.clone()),
        Quantity::Bool(b) => Value::Bool(*b),
    }
}

pub fn report_value(r: &AuditReport) -> Value {
    let mut quantities = Map::new();
    for (name, q) in &r.quantities {
        quantities.insert(name.clone(), quantity_value(q));
    }
    json!({
        "name": r.name,
        "statement": r.statement,
        "verdict": r.verdict.as_str(),
        "quantities": quantities,
        "witnesses": r.witnesses,
        "notes": r.notes,
    })
}

pub fn overall(reports: &[AuditReport]) -> Verdict {
    reports.iter().fold(Verdict::Vacuous, |v, r| v.and(r.verdict))
}

/// `sha256:<hex>` of the given byte strings, each length-prefixed.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let bytes = h.finalize();
    let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// The document printed for one command.
pub fn document(command: &str, instance: &str, inputs_digest: &str, flags: Value, reports: &[AuditReport]) -> Value {
    json!({
        "command": command,
        "instance": instance,
        "inputs_digest": inputs_digest,
        "flags": flags,
        "verdict": overall(reports).as_str(),
        "reports": reports.iter().map(report_value).collect::<Vec<_>>(),
    })
}

pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use vcnk_core::rational::ratio;

    #[test]
    fn exact_quantities_render_as_fractions() {
        assert_eq!(quantity_value(&Quantity::Exact(ratio(2, 6))), json!("1/3"));
        assert_eq!(quantity_value(&Quantity::Integer(7.into())), json!(7));
    }

    #[test]
    fn digest_separates_parts() {
        assert_ne!(digest(&[b"ab", b"c"]), digest(&[b"a", b"bc"]));
        assert!(digest(&[b""]).starts_with("sha256:"));
    }

    #[test]
    fn overall_verdict_folds() {
        let mut a = AuditReport::new("a", "s");
        a.record(Verdict::Verified);
        let b = AuditReport::new("b", "s");
        assert_eq!(overall(&[a.clone(), b]), Verdict::Verified);
        let mut c = AuditReport::new("c", "s");
        c.record(Verdict::Violated);
        assert_eq!(overall(&[a, c]), Verdict::Violated);
    }
}
