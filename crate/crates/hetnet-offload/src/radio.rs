//! Rate computation: per-channel SINR and the precomputed rate tables that
//! keep the linearized programs linear.
//!
//! The macro band is orthogonal to the small-cell band, so MUE rates are
//! interference free. Small cells fully reuse their band, so a SUE's rate
//! depends on which SUEs of the other cells share the channel. Every such
//! co-channel combination ("combo") is enumerated explicitly, with an IDLE
//! slot per cell so partial occupancy is representable; the all-IDLE combo
//! is excluded (an unused channel is simply the all-zeros state).

use itertools::Itertools;
use thiserror::Error;

use crate::model::Scenario;

#[derive(Debug, Error)]
pub enum RadioError {
    #[error("user {user} is not associated with BS {bs}")]
    NotAssociated { user: usize, bs: usize },
    #[error("macro-tier SINR cannot have co-channel interferers")]
    MacroInterference,
    #[error("rate table would hold {entries} entries, above the cap of {cap}; use the low-complexity algorithm")]
    TooLarge { entries: usize, cap: usize },
}

/// Default cap on the number of precomputed rate entries.
pub const DEFAULT_COMBO_CAP: usize = 1_000_000;

/// One co-channel occupancy pattern: for each small cell, the transmitting
/// SUE (global user index) or `None` for IDLE. At least one slot is occupied.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Combo {
    pub occupants: Vec<Option<usize>>,
}

impl Combo {
    /// Cell slot (0-based over small cells) occupied by `user`, if any.
    pub fn slot_of(&self, user: usize) -> Option<usize> {
        self.occupants.iter().position(|&o| o == Some(user))
    }
}

/// Precomputed achievable-rate coefficients.
#[derive(Debug, Clone)]
pub struct RateTable {
    /// Global user indices of the MUEs, in ascending order.
    pub mues: Vec<usize>,
    /// `mue_rate[i][n]`: rate of `mues[i]` on channel `n`, bit/s.
    pub mue_rate: Vec<Vec<f64>>,
    /// All co-channel combos over the SUEs (channel independent).
    pub combos: Vec<Combo>,
    /// `sue_rate[n][c][m]`: rate of the cell-`m+1` occupant of combo `c` on
    /// channel `n` under that combo's interference set; 0 for IDLE slots.
    pub sue_rate: Vec<Vec<Vec<f64>>>,
}

impl RateTable {
    pub fn mue_pos(&self, user: usize) -> Option<usize> {
        self.mues.iter().position(|&k| k == user)
    }

    /// Indices of combos in which `user` transmits.
    pub fn combos_of(&self, user: usize) -> Vec<usize> {
        (0..self.combos.len())
            .filter(|&c| self.combos[c].slot_of(user).is_some())
            .collect()
    }
}

/// SINR of user `k` towards its serving BS `m` on channel `n`, given the
/// co-channel SUEs (global indices, other cells) transmitting on `n`.
pub fn sinr(s: &Scenario, k: usize, m: usize, n: usize, cochannel: &[usize]) -> Result<f64, RadioError> {
    if s.users[k].cell != m {
        return Err(RadioError::NotAssociated { user: k, bs: m });
    }
    let r = &s.radio;
    let signal = r.tx_power(m) * r.gains[k][m][n];
    if m == 0 {
        if !cochannel.is_empty() {
            return Err(RadioError::MacroInterference);
        }
        return Ok(signal / r.noise_density);
    }
    let interference: f64 = cochannel
        .iter()
        .map(|&j| r.pt_sc * r.gains[j][m][n])
        .sum();
    Ok(signal / (interference + r.noise_density))
}

/// Shannon rate in bit/s for a given SINR and bandwidth.
pub fn rate(gamma: f64, bandwidth: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    bandwidth * (1.0 + gamma).log2()
}

/// Enumerate every combo over the given per-cell SUE index lists. Each cell
/// contributes its SUEs plus an IDLE marker; the all-IDLE tuple is skipped.
pub fn enumerate_combos(sues_by_cell: &[Vec<usize>]) -> Vec<Combo> {
    if sues_by_cell.is_empty() {
        return Vec::new();
    }
    sues_by_cell
        .iter()
        .map(|cell| {
            std::iter::once(None)
                .chain(cell.iter().map(|&k| Some(k)))
                .collect::<Vec<_>>()
        })
        .multi_cartesian_product()
        .filter(|occ| occ.iter().any(|o| o.is_some()))
        .map(|occupants| Combo { occupants })
        .collect()
}

/// Build the full rate table for a scenario, refusing if it would exceed
/// `cap` entries.
pub fn build_rate_table(s: &Scenario, cap: usize) -> Result<RateTable, RadioError> {
    let m_cells = s.topology.num_small_cells();
    let n = s.radio.num_channels;
    let mues = s.mues();
    let sues_by_cell: Vec<Vec<usize>> = (1..=m_cells).map(|m| s.cell_users(m)).collect();
    let combos = enumerate_combos(&sues_by_cell);

    let entries = combos.len() * n * m_cells + mues.len() * n;
    if entries > cap {
        return Err(RadioError::TooLarge { entries, cap });
    }

    let w = s.radio.bandwidth;
    let mue_rate = mues
        .iter()
        .map(|&k| {
            (0..n)
                .map(|ch| rate(sinr(s, k, 0, ch, &[]).expect("mue"), w))
                .collect()
        })
        .collect();

    let mut sue_rate = Vec::with_capacity(n);
    for ch in 0..n {
        let mut per_combo = Vec::with_capacity(combos.len());
        for combo in &combos {
            let mut per_cell = vec![0.0; m_cells];
            for (slot, occ) in combo.occupants.iter().enumerate() {
                if let Some(k) = *occ {
                    let interferers: Vec<usize> = combo
                        .occupants
                        .iter()
                        .enumerate()
                        .filter(|&(s2, o)| s2 != slot && o.is_some())
                        .map(|(_, o)| o.unwrap())
                        .collect();
                    let g = sinr(s, k, slot + 1, ch, &interferers).expect("sue");
                    per_cell[slot] = rate(g, w);
                }
            }
            per_combo.push(per_cell);
        }
        sue_rate.push(per_combo);
    }

    Ok(RateTable {
        mues,
        mue_rate,
        combos,
        sue_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate, GeneratorParams};
    use approx::assert_abs_diff_eq;

    fn tiny(sc_count: usize, sues: usize, mues: usize, channels: usize, seed: u64) -> Scenario {
        generate(
            &GeneratorParams {
                sc_count,
                mues,
                sues_per_sc: sues,
                num_channels: channels,
                tasks_per_user: 2,
                clock_levels: 3,
                ..GeneratorParams::default()
            },
            seed,
        )
        .unwrap()
    }

    #[test]
    fn forced_sinr_values() {
        let mut s = tiny(1, 1, 1, 1, 3);
        let sigma = s.radio.noise_density;
        // MUE with P_t * h = 3 sigma and no interferers.
        s.radio.gains[0][0][0] = 3.0 * sigma / s.radio.pt_macro;
        assert_abs_diff_eq!(sinr(&s, 0, 0, 0, &[]).unwrap(), 3.0, epsilon = 1e-12);
        // Serving-cell mismatch is rejected.
        let sue = s.cell_users(1)[0];
        assert!(sinr(&s, sue, 0, 0, &[]).is_err());
        assert!(sinr(&s, 0, 1, 0, &[]).is_err());
    }

    #[test]
    fn sue_sinr_with_equal_interferer_tends_to_one() {
        let mut s = tiny(2, 1, 0, 1, 11);
        let (a, b) = (s.cell_users(1)[0], s.cell_users(2)[0]);
        s.radio.gains[a][1][0] = 2.0;
        s.radio.gains[b][1][0] = 2.0; // equal received power at BS 1
        s.radio.noise_density = 1e-300;
        assert_abs_diff_eq!(sinr(&s, a, 1, 0, &[b]).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sinr_matches_scalar_recomputation() {
        let s = tiny(2, 2, 2, 3, 17);
        let r = &s.radio;
        for m in 1..=2 {
            for &k in &s.cell_users(m) {
                for ch in 0..3 {
                    let others: Vec<usize> = (1..=2)
                        .filter(|&j| j != m)
                        .flat_map(|j| s.cell_users(j))
                        .take(1)
                        .collect();
                    let expect = r.pt_sc * r.gains[k][m][ch]
                        / (others.iter().map(|&j| r.pt_sc * r.gains[j][m][ch]).sum::<f64>()
                            + r.noise_density);
                    assert_abs_diff_eq!(
                        sinr(&s, k, m, ch, &others).unwrap(),
                        expect,
                        epsilon = 1e-12 * expect
                    );
                }
            }
        }
    }

    #[test]
    fn rate_reference_points() {
        assert_abs_diff_eq!(rate(3.0, 180e3), 360e3, epsilon = 1e-6);
        assert_abs_diff_eq!(rate(0.0, 180e3), 0.0);
        assert_abs_diff_eq!(rate(1.0, 180e3), 180e3, epsilon = 1e-6);
    }

    #[test]
    fn combo_counting() {
        // 2 SCs x 2 SUEs: (3*3 - 1) = 8 combos; with N=4 that is 32 per-cell
        // rate rows of 2 entries each.
        let s = tiny(2, 2, 1, 4, 5);
        let t = build_rate_table(&s, DEFAULT_COMBO_CAP).unwrap();
        assert_eq!(t.combos.len(), 8);
        assert_eq!(t.sue_rate.len(), 4);
        assert_eq!(t.sue_rate[0].len(), 8);
        // IDLE slots carry zero rate.
        for ch in &t.sue_rate {
            for (c, per_cell) in ch.iter().enumerate() {
                for (slot, &r) in per_cell.iter().enumerate() {
                    assert_eq!(r == 0.0, t.combos[c].occupants[slot].is_none());
                }
            }
        }
    }

    #[test]
    fn macro_only_table_is_combo_free() {
        let s = tiny(0, 0, 2, 3, 5);
        let t = build_rate_table(&s, DEFAULT_COMBO_CAP).unwrap();
        assert!(t.combos.is_empty());
        assert_eq!(t.mue_rate.len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let s = tiny(2, 2, 1, 4, 5);
        match build_rate_table(&s, 10) {
            Err(RadioError::TooLarge { entries: 68, cap: 10 }) => {}
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn interference_never_raises_rates() {
        let s = tiny(2, 2, 1, 4, 23);
        let t = build_rate_table(&s, DEFAULT_COMBO_CAP).unwrap();
        for ch in 0..4 {
            for (c, combo) in t.combos.iter().enumerate() {
                for (c2, combo2) in t.combos.iter().enumerate() {
                    // combo2 extends combo when it keeps every occupant and
                    // fills at least one more slot.
                    let extends = combo
                        .occupants
                        .iter()
                        .zip(&combo2.occupants)
                        .all(|(a, b)| a.is_none() || a == b);
                    if extends {
                        for slot in 0..combo.occupants.len() {
                            if combo.occupants[slot].is_some() {
                                assert!(
                                    t.sue_rate[ch][c2][slot] <= t.sue_rate[ch][c][slot] + 1e-9
                                );
                            }
                        }
                    }
                    let _ = c2;
                }
                let _ = c;
            }
        }
    }

    #[test]
    fn table_matches_fresh_sinr_recomputation() {
        let s = tiny(2, 2, 2, 3, 29);
        let t = build_rate_table(&s, DEFAULT_COMBO_CAP).unwrap();
        for (i, &k) in t.mues.iter().enumerate() {
            for ch in 0..3 {
                let expect = rate(sinr(&s, k, 0, ch, &[]).unwrap(), s.radio.bandwidth);
                assert_eq!(t.mue_rate[i][ch], expect);
            }
        }
        for ch in 0..3 {
            for (c, combo) in t.combos.iter().enumerate() {
                for (slot, occ) in combo.occupants.iter().enumerate() {
                    if let Some(k) = *occ {
                        let interferers: Vec<usize> = combo
                            .occupants
                            .iter()
                            .filter_map(|&o| o)
                            .filter(|&j| j != k)
                            .collect();
                        let expect =
                            rate(sinr(&s, k, slot + 1, ch, &interferers).unwrap(), s.radio.bandwidth);
                        assert_eq!(t.sue_rate[ch][c][slot], expect);
                    }
                }
            }
        }
    }
}
