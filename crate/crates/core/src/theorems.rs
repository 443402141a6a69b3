//! The exceptional sets `A_s`, the comonotone regime classifier and the
//! regime tables over `(alpha, N)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Offset above a segment's lower end when sampling a table cell.
pub const CELL_EPS: f64 = 1e-9;

/// Regime of the comparison between `n^alpha E_n^(1)(f, Y_s)` and
/// `n^alpha E_n(f)` from degree `N` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeSymbol {
    /// The threshold can be taken equal to `N`.
    Plus,
    /// The threshold depends on the change points, not on `f`.
    Oplus,
    /// The threshold must depend on `f`.
    Ominus,
}

/// A table cell: a single regime or one of the two mixed symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Plus,
    Oplus,
    Ominus,
    /// `oplus` for `alpha` in `A_s`, `plus` otherwise.
    OplusStar,
    /// `ominus` for `0 < alpha <= 1`, `oplus` for `1 < alpha <= 2`.
    OminusTilde,
}

impl Cell {
    /// Compact ASCII code: `+`, `O+`, `O-`, `*`, `~`.
    pub fn ascii(self) -> &'static str {
        match self {
            Cell::Plus => "+",
            Cell::Oplus => "O+",
            Cell::Ominus => "O-",
            Cell::OplusStar => "*",
            Cell::OminusTilde => "~",
        }
    }

    pub fn from_ascii(s: &str) -> Option<Self> {
        Some(match s {
            "+" => Cell::Plus,
            "O+" => Cell::Oplus,
            "O-" => Cell::Ominus,
            "*" => Cell::OplusStar,
            "~" => Cell::OminusTilde,
            _ => return None,
        })
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cell::Plus => "+",
            Cell::Oplus => "\u{2295}",
            Cell::Ominus => "\u{2296}",
            Cell::OplusStar => "\u{229B}",
            Cell::OminusTilde => "\u{2296}\u{0303}",
        })
    }
}

impl fmt::Display for RegimeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            RegimeSymbol::Plus => Cell::Plus,
            RegimeSymbol::Oplus => Cell::Oplus,
            RegimeSymbol::Ominus => Cell::Ominus,
        };
        c.fmt(f)
    }
}

/// `A_s = {j : 1 <= j <= s-1} ∪ {2j : 1 <= j <= s}`.
pub fn exceptional_set(s: usize) -> BTreeSet<usize> {
    (1..s).chain((1..=s).map(|j| 2 * j)).collect()
}

fn in_exceptional(alpha: f64, s: usize) -> bool {
    alpha.fract() == 0.0 && alpha >= 1.0 && exceptional_set(s).contains(&(alpha as usize))
}

fn ceil(alpha: f64) -> usize {
    alpha.ceil() as usize
}

/// Regime of `(alpha, N, s)`; the `+` rules are tried first, then `ominus`.
pub fn classify_regime(alpha: f64, n_cal: usize, s: usize) -> RegimeSymbol {
    assert!(alpha > 0.0, "alpha must be positive");
    let a2 = (alpha / 2.0).ceil() as usize;
    let two_s = 2.0 * s as f64;
    let plus = (!in_exceptional(alpha, s) && n_cal <= a2)
        || (two_s < alpha && alpha <= two_s + 2.0 && n_cal <= s + 2)
        || alpha > two_s + 2.0;
    if plus {
        return RegimeSymbol::Plus;
    }
    let ca = ceil(alpha);
    let ominus = (ca == 1 && ((s >= 1 && n_cal >= s + 2) || (s == 0 && n_cal >= 3)))
        || (ca == 2 && n_cal >= s + 3);
    if ominus {
        RegimeSymbol::Ominus
    } else {
        RegimeSymbol::Oplus
    }
}

/// How table rows index `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowConvention {
    /// Row `r` holds `alpha` in `(r-1, r]`.
    CeilAlpha,
    /// Row `r` holds `alpha` in `(2r-2, 2r]`.
    CeilHalfAlpha,
}

/// Rendered regime table; `rows[0]` is the lowest row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeTable {
    pub s: usize,
    pub convention: RowConvention,
    pub rows: Vec<Vec<Cell>>,
}

impl RegimeTable {
    pub fn cell(&self, row: usize, n_cal: usize) -> Cell {
        self.rows[row - 1][n_cal - 1]
    }

    /// Rows as space-separated ASCII codes, lowest row first.
    pub fn ascii_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|c| c.ascii()).collect::<Vec<_>>().join(" "))
            .collect()
    }

    /// Layout with the highest row on top and `N` along the bottom.
    pub fn to_text(&self) -> String {
        let head = match self.convention {
            RowConvention::CeilAlpha => "ceil(a)",
            RowConvention::CeilHalfAlpha => "ceil(a/2)",
        };
        let width = head.len().max(3);
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate().rev() {
            out.push_str(&format!("{:>width$} |", i + 1));
            for c in row {
                out.push_str(&format!(" {:<3}", c.to_string()));
            }
            out.push('\n');
        }
        out.push_str(&format!("{head:>width$} |"));
        for n in 1..=self.rows.first().map_or(0, Vec::len) {
            out.push_str(&format!(" {n:<3}"));
        }
        out.push_str(" N\n");
        out
    }

    pub fn to_csv(&self) -> String {
        let cols = self.rows.first().map_or(0, Vec::len);
        let mut out = String::from("row");
        for n in 1..=cols {
            out.push_str(&format!(",N={n}"));
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&(i + 1).to_string());
            for c in row {
                out.push(',');
                out.push_str(c.ascii());
            }
            out.push('\n');
        }
        out
    }
}

/// Row convention, row count and column count used for `s`.
pub fn table_shape(s: usize) -> (RowConvention, usize, usize) {
    match s {
        0 => (RowConvention::CeilHalfAlpha, 4, 4),
        1..=3 => (RowConvention::CeilAlpha, 2 * s + 3, s + 3),
        _ => (RowConvention::CeilHalfAlpha, s + 2, s + 4),
    }
}

/// Sample points of a cell: `lower + eps`, midpoint and upper end of every
/// unit segment of the row's `alpha` range.
fn cell_samples(convention: RowConvention, row: usize) -> Vec<f64> {
    let (lo, hi) = match convention {
        RowConvention::CeilAlpha => (row - 1, row),
        RowConvention::CeilHalfAlpha => (2 * row - 2, 2 * row),
    };
    (lo..hi)
        .flat_map(|a| {
            let a = a as f64;
            [a + CELL_EPS, a + 0.5, a + 1.0]
        })
        .collect()
}

/// Aggregates the regimes sampled over a cell.
pub fn aggregate(samples: &[(f64, RegimeSymbol)]) -> Option<Cell> {
    let has = |r: RegimeSymbol| samples.iter().any(|(_, x)| *x == r);
    match (has(RegimeSymbol::Plus), has(RegimeSymbol::Oplus), has(RegimeSymbol::Ominus)) {
        (true, false, false) => Some(Cell::Plus),
        (false, true, false) => Some(Cell::Oplus),
        (false, false, true) => Some(Cell::Ominus),
        (true, true, false) => Some(Cell::OplusStar),
        (false, true, true) => {
            let split = samples.iter().all(|(a, r)| match r {
                RegimeSymbol::Ominus => *a <= 1.0,
                _ => *a > 1.0 && *a <= 2.0,
            });
            split.then_some(Cell::OminusTilde)
        }
        _ => None,
    }
}

/// Regime table for `s` in the row convention of [`table_shape`].
pub fn render_table(s: usize) -> RegimeTable {
    let (convention, rows, cols) = table_shape(s);
    let rows = (1..=rows)
        .map(|row| {
            let alphas = cell_samples(convention, row);
            (1..=cols)
                .map(|n_cal| {
                    let samples: Vec<(f64, RegimeSymbol)> =
                        alphas.iter().map(|&a| (a, classify_regime(a, n_cal, s))).collect();
                    aggregate(&samples).expect("cell mixes regimes outside the known patterns")
                })
                .collect()
        })
        .collect();
    RegimeTable { s, convention, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exceptional_sets() {
        assert!(exceptional_set(0).is_empty());
        assert_eq!(exceptional_set(1), BTreeSet::from([2]));
        assert_eq!(exceptional_set(2), BTreeSet::from([1, 2, 4]));
    }

    #[test]
    fn classifier_examples() {
        assert_eq!(classify_regime(1.5, 1, 0), RegimeSymbol::Plus);
        assert_eq!(classify_regime(0.5, 3, 0), RegimeSymbol::Ominus);
        assert_eq!(classify_regime(3.5, 4, 1), RegimeSymbol::Oplus);
        assert_eq!(classify_regime(2.0, 1, 1), RegimeSymbol::Oplus);
        assert_eq!(classify_regime(1.5, 1, 1), RegimeSymbol::Plus);
    }

    #[test]
    fn aggregate_rejects_unknown_mixes() {
        let s = [(0.5, RegimeSymbol::Plus), (0.7, RegimeSymbol::Ominus)];
        assert_eq!(aggregate(&s), None);
        let s = [(1.5, RegimeSymbol::Ominus), (1.7, RegimeSymbol::Oplus)];
        assert_eq!(aggregate(&s), None);
    }

    #[test]
    fn text_rendering_has_one_line_per_row() {
        let t = render_table(1);
        assert_eq!(t.to_text().lines().count(), t.rows.len() + 1);
        assert!(t.to_text().contains('\u{229B}'));
        assert_eq!(t.to_csv().lines().count(), t.rows.len() + 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn every_triple_classifies(alpha in 1e-6f64..30.0, n in 1usize..40, s in 0usize..12) {
            let _ = classify_regime(alpha, n, s);
        }
    }

    proptest! {
        #[test]
        fn exceptional_alpha_never_plus_by_first_rule(s in 0usize..10, n in 1usize..20) {
            for a in exceptional_set(s) {
                let alpha = a as f64;
                let a2 = (alpha / 2.0).ceil() as usize;
                let later_rules = (2.0 * s as f64) < alpha;
                if n <= a2 && !later_rules {
                    prop_assert_ne!(classify_regime(alpha, n, s), RegimeSymbol::Plus);
                }
            }
        }
    }
}
