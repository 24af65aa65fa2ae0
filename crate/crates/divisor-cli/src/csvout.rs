//! CSV rendering: header row, shortest-roundtrip number formatting,
//! comma separator, LF line endings. Output is byte-stable for
//! identical inputs on a given platform.

use divisor_core::{GridSignedDensity, LambdaReport, PsiTrace, SignedAtomicMeasure};

pub fn psi_csv(trace: &PsiTrace) -> String {
    let mut out = String::from("y,re_psi,im_psi\n");
    for &(y, psi) in trace.samples() {
        out.push_str(&format!("{},{},{}\n", y, psi.re, psi.im));
    }
    out
}

pub fn atoms_csv(m: &SignedAtomicMeasure) -> String {
    let mut out = String::from("location,weight\n");
    for a in m.atoms() {
        out.push_str(&format!("{},{}\n", a.location, a.weight));
    }
    out
}

pub fn density_csv(d: &GridSignedDensity) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in d.iter_points() {
        out.push_str(&format!("{x},{v}\n"));
    }
    out
}

pub fn scan_csv(report: &LambdaReport) -> String {
    let mut out = String::from("t,member,method,evidence_value\n");
    for v in &report.verdicts {
        out.push_str(&format!(
            "{},{},{},{}\n",
            v.t,
            v.member,
            v.method,
            v.evidence.value()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use divisor_core::second_characteristic;
    use divisor_core::DistExpr;

    #[test]
    fn csv_has_headers_and_lf_endings() {
        let m = SignedAtomicMeasure::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let csv = atoms_csv(&m);
        assert!(csv.starts_with("location,weight\n"));
        assert!(!csv.contains('\r'));
        assert_eq!(csv.lines().count(), 3);

        let trace = second_characteristic(&DistExpr::cauchy(1.0).unwrap(), 5.0, 32).unwrap();
        let csv = psi_csv(&trace);
        assert!(csv.starts_with("y,re_psi,im_psi\n"));
        assert_eq!(csv.lines().count(), trace.samples().len() + 1);
    }

    #[test]
    fn numbers_round_trip() {
        let d = GridSignedDensity::new(-1.0, 0.1, vec![1.0 / 3.0, -2.5e-13]).unwrap();
        let csv = density_csv(&d);
        let line = csv.lines().nth(1).unwrap();
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }
}
