//! The experiment kinds the runner knows about.

use crate::config::CoefficientSpec;
use crate::error::CliError;

pub struct KindInfo {
    pub name: &'static str,
    /// What the experiment shows, in one line.
    pub summary: &'static str,
    pub default_model: Option<&'static str>,
    pub default_grid: &'static str,
    pub default_ensemble: usize,
    pub default_coefficients: Option<fn() -> CoefficientSpec>,
}

const fn kind(name: &'static str, summary: &'static str, model: Option<&'static str>, grid: &'static str, ensemble: usize) -> KindInfo {
    KindInfo { name, summary, default_model: model, default_grid: grid, default_ensemble: ensemble, default_coefficients: None }
}

const fn linear(name: &'static str, summary: &'static str, c: fn() -> CoefficientSpec) -> KindInfo {
    KindInfo { name, summary, default_model: None, default_grid: "2^10..2^17", default_ensemble: 0, default_coefficients: Some(c) }
}

pub const CATALOG: &[KindInfo] = &[
    kind("theorem1_bound", "exact max_k ||S_k - M_nk|| against 3 max_k ||E(S_k|X_0)||", Some("two_state"), "2^0..2^8", 0),
    kind("poisson_residual", "defining identities of h_n^o, h_n, f_eps and the residual ratio of the averaged approximant", Some("two_state"), "2^0..2^14", 0),
    kind("equivalence_gap", "n ||H_averaged(n) - H_resolvent(1/n)||^2 / sigma_n^2 along the grid", Some("two_state"), "2^3..2^12", 0),
    kind("variance_profile", "sigma_n^2, slowly varying part ell(n) and ||E(S_n|X_0)|| / sigma_n", Some("two_state"), "2^0..2^14", 0),
    linear("example1_summable", "linear process with geometric coefficients: sigma_n1^2 / sigma_n2^2 -> 0", || CoefficientSpec::SummableGeometric { rho: 0.5 }),
    linear("example1_harmonic", "linear process with a_j = 1/j: ratio9 -> 0 while sigma_n2^2 ~ n ln^2 n", || CoefficientSpec::Harmonic),
    linear("example1_loggap", "linear process whose partial sums decay like 1/ln n: ratio9 -> 0", || CoefficientSpec::LogGap),
    linear("example1_powerlaw", "linear process with a_j = j^-beta: ratio9 stabilizes, condition fails", || CoefficientSpec::PowerLaw { beta: 0.75 }),
    linear("example1_alternating", "linear process with a_j = (-1)^j j^-beta: ratio9 -> 0", || CoefficientSpec::AlternatingPower { beta: 0.75 }),
    kind("conditional_clt", "pi-averaged Levy distance of S_n/sigma_n given X_0 from the normal law", Some("two_state"), "2^6,2^8,2^10,2^12", 2000),
    kind("lindeberg", "conditional variance V_n(1) and truncated second moments of the martingale differences", Some("two_state"), "2^8,2^10,2^12", 500),
    kind("v_sup", "sup_t |V_n(t) - t| over paths", Some("two_state"), "2^6,2^8,2^10,2^12", 500),
    kind("remainder_max", "max_j |S_j - M_j| / sqrt(n) exceedance probabilities", Some("two_state"), "2^6,2^8,2^10,2^12,2^14", 500),
    kind("chaining", "dyadic chaining bound against Monte Carlo E max_k T_k^2", Some("two_state"), "2^6,2^10", 4000),
    kind("alpha_mixing", "exact strong-mixing coefficients alpha_n by subset enumeration", Some("two_state"), "1..10", 0),
    kind("example3", "i.i.d. increments with tail 2/(y^2 ln^1.5 y): max_k |Y_k - Y_0| / sigma_n, with a bounded control", None, "2^10,2^12,2^14,2^16", 500),
    kind("coboundary", "max_k |S_k| / sqrt(n) for a coboundary observable", Some("coboundary"), "2^8,2^10,2^12,2^14", 500),
    kind("mixing_clt", "alpha_n, unconditional Levy distance and the conditional statistic side by side", Some("two_state"), "2^6,2^8,2^10,2^12", 2000),
];

pub fn lookup(name: &str) -> Result<&'static KindInfo, CliError> {
    CATALOG.iter().find(|k| k.name == name).ok_or_else(|| {
        let suggestion = CATALOG
            .iter()
            .map(|k| (strsim::levenshtein(name, k.name), k.name))
            .min()
            .filter(|(d, _)| *d <= 4.max(name.len() / 3))
            .map(|(_, n)| n.to_string());
        CliError::UnknownExperiment { name: name.to_string(), suggestion }
    })
}

pub fn catalog_text() -> String {
    let width = CATALOG.iter().map(|k| k.name.len()).max().unwrap_or(0);
    CATALOG.iter().map(|k| format!("{:width$}  {}\n", k.name, k.summary)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        assert_eq!(CATALOG.len(), 18);
        assert!(catalog_text().lines().count() >= 15);
        for k in CATALOG {
            crate::grid::parse_grid(k.default_grid).unwrap();
        }
    }

    #[test]
    fn suggestions() {
        match lookup("lindberg") {
            Err(CliError::UnknownExperiment { suggestion, .. }) => assert_eq!(suggestion.as_deref(), Some("lindeberg")),
            _ => panic!(),
        }
        match lookup("zzzzzzzzzzzzzzzzzzzzzz") {
            Err(CliError::UnknownExperiment { suggestion, .. }) => assert!(suggestion.is_none()),
            _ => panic!(),
        }
    }
}
