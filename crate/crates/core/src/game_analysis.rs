//! The symmetric 2x2 identity coordination game and checks of its
//! equilibrium structure.
//!
//! Payoffs: `(binary, binary) = (0.5, 0.5)`, `(nonbinary, nonbinary) =
//! (phi, phi)`, and `(0, 0)` off the diagonal, where `phi` is the chance
//! that two nonbinary players accept each other.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Payoff of coordinating on the binary profile.
pub const BINARY_PAYOFF: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Binary,
    Nonbinary,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Binary, Action::Nonbinary];

    pub fn other(self) -> Action {
        match self {
            Action::Binary => Action::Nonbinary,
            Action::Nonbinary => Action::Binary,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Binary => "binary",
            Action::Nonbinary => "nonbinary",
        }
    }
}

/// `(row action, column action)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(pub Action, pub Action);

impl Profile {
    pub const BINARY: Profile = Profile(Action::Binary, Action::Binary);
    pub const NONBINARY: Profile = Profile(Action::Nonbinary, Action::Nonbinary);

    pub fn all() -> [Profile; 4] {
        [
            Profile(Action::Binary, Action::Binary),
            Profile(Action::Binary, Action::Nonbinary),
            Profile(Action::Nonbinary, Action::Binary),
            Profile(Action::Nonbinary, Action::Nonbinary),
        ]
    }

    pub fn swapped(self) -> Profile {
        Profile(self.1, self.0)
    }

    fn action(self, player: usize) -> Action {
        if player == 0 {
            self.0
        } else {
            self.1
        }
    }

    fn with_action(self, player: usize, action: Action) -> Profile {
        if player == 0 {
            Profile(action, self.1)
        } else {
            Profile(self.0, action)
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0.as_str(), self.1.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageGame {
    phi: f64,
}

impl StageGame {
    pub fn new(phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                range: "[0, 1]",
            });
        }
        Ok(Self { phi })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(row payoff, column payoff)`.
    pub fn payoff(&self, profile: Profile) -> (f64, f64) {
        match profile {
            Profile(Action::Binary, Action::Binary) => (BINARY_PAYOFF, BINARY_PAYOFF),
            Profile(Action::Nonbinary, Action::Nonbinary) => (self.phi, self.phi),
            _ => (0.0, 0.0),
        }
    }

    fn payoff_to(&self, player: usize, profile: Profile) -> f64 {
        let (r, c) = self.payoff(profile);
        if player == 0 {
            r
        } else {
            c
        }
    }

    /// Expected payoff to `player` choosing `own` against an opponent
    /// playing `Binary` with probability `opponent.p_binary`.
    pub fn expected_payoff(&self, player: usize, own: Action, opponent: MixedStrategy) -> f64 {
        Action::ALL
            .iter()
            .map(|&theirs| {
                let profile = if player == 0 {
                    Profile(own, theirs)
                } else {
                    Profile(theirs, own)
                };
                opponent.prob(theirs) * self.payoff_to(player, profile)
            })
            .sum()
    }

    pub fn matrix(&self) -> [[(f64, f64); 2]; 2] {
        let mut m = [[(0.0, 0.0); 2]; 2];
        for (r, &ra) in Action::ALL.iter().enumerate() {
            for (c, &ca) in Action::ALL.iter().enumerate() {
                m[r][c] = self.payoff(Profile(ra, ca));
            }
        }
        m
    }
}

pub fn build_game(phi: f64) -> Result<StageGame> {
    StageGame::new(phi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedStrategy {
    pub p_binary: f64,
}

impl MixedStrategy {
    pub fn new(p_binary: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_binary) {
            return Err(Error::OutOfRange {
                name: "p_binary",
                value: p_binary,
                range: "[0, 1]",
            });
        }
        Ok(Self { p_binary })
    }

    pub fn p_nonbinary(&self) -> f64 {
        1.0 - self.p_binary
    }

    pub fn prob(&self, action: Action) -> f64 {
        match action {
            Action::Binary => self.p_binary,
            Action::Nonbinary => self.p_nonbinary(),
        }
    }

    /// Plays `action` except with probability `tremble`.
    pub fn trembling(action: Action, tremble: f64) -> Self {
        match action {
            Action::Binary => Self {
                p_binary: 1.0 - tremble,
            },
            Action::Nonbinary => Self { p_binary: tremble },
        }
    }
}

pub fn is_nash(game: &StageGame, profile: Profile) -> bool {
    (0..2).all(|player| {
        let current = game.payoff_to(player, profile);
        let deviation = profile.with_action(player, profile.action(player).other());
        game.payoff_to(player, deviation) <= current
    })
}

/// Profiles with no strictly improving unilateral deviation.
pub fn pure_nash(game: &StageGame) -> Vec<Profile> {
    Profile::all()
        .into_iter()
        .filter(|&p| is_nash(game, p))
        .collect()
}

/// `action` is weakly dominated for `player` if the other action does at
/// least as well against every opponent action and strictly better against
/// one.
pub fn is_weakly_dominated(game: &StageGame, player: usize, action: Action) -> bool {
    let alt = action.other();
    let mut strictly = false;
    for theirs in Action::ALL {
        let own = Profile(action, theirs);
        let dev = Profile(alt, theirs);
        let (own, dev) = if player == 0 {
            (own, dev)
        } else {
            (own.swapped(), dev.swapped())
        };
        let (u, v) = (game.payoff_to(player, own), game.payoff_to(player, dev));
        if v < u {
            return false;
        }
        strictly |= v > u;
    }
    strictly
}

/// Trembling-hand perfection via the two-player criterion: a Nash
/// equilibrium is perfect iff no player uses a weakly dominated action.
pub fn is_thpe(game: &StageGame, profile: Profile) -> Result<bool> {
    if !is_nash(game, profile) {
        return Err(Error::NotNash(profile.to_string()));
    }
    Ok((0..2).all(|player| !is_weakly_dominated(game, player, profile.action(player))))
}

/// Tremble probability assigned to the off-profile action at step `k`.
pub fn tremble(k: u32) -> f64 {
    1.0 / (f64::from(k) + 3.0)
}

fn best_response_at(game: &StageGame, profile: Profile, k: u32) -> bool {
    let eps = tremble(k);
    (0..2).all(|player| {
        let opponent = MixedStrategy::trembling(profile.action(1 - player), eps);
        let own = profile.action(player);
        game.expected_payoff(player, own, opponent)
            >= game.expected_payoff(player, own.other(), opponent)
    })
}

/// Smallest `k0 <= k_max` such that each player's profile action is a best
/// response to the opponent's tremble `1 / (k + 3)` for every `k` in
/// `k0..=k_max`, or `None` if it fails at `k_max`.
///
/// A tail of the tremble family is itself a sequence of fully mixed
/// strategies converging to the profile, so any such `k0` witnesses
/// perfection.
pub fn tremble_tail_start(game: &StageGame, profile: Profile, k_max: u32) -> Option<u32> {
    let mut start = None;
    for k in (1..=k_max).rev() {
        if !best_response_at(game, profile, k) {
            break;
        }
        start = Some(k);
    }
    start
}

pub fn thpe_tremble_check(game: &StageGame, profile: Profile, k_max: u32) -> bool {
    tremble_tail_start(game, profile, k_max).is_some()
}

/// One-stage deviation test for a path of stage profiles: no period admits
/// a profitable unilateral deviation.
pub fn verify_spe_sequence(seq: &[Profile], phi: f64) -> Result<bool> {
    let game = StageGame::new(phi)?;
    Ok(!seq.is_empty() && seq.iter().all(|&p| is_nash(&game, p)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `P(|U - V| <= b)` for independent uniforms.
pub fn compute_phi<R: Rng + ?Sized>(b: f64, samples: usize, rng: &mut R) -> Result<PhiEstimate> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::OutOfRange {
            name: "b",
            value: b,
            range: "[0, 1]",
        });
    }
    if samples == 0 {
        return Err(Error::OutOfRange {
            name: "samples",
            value: 0.0,
            range: ">= 1",
        });
    }
    let hits = (0..samples)
        .filter(|_| {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            (u - v).abs() <= b
        })
        .count();
    let p = hits as f64 / samples as f64;
    Ok(PhiEstimate {
        estimate: p,
        std_err: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// Results of the equilibrium checks for one `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameReport {
    pub phi: f64,
    pub k_max: u32,
    pub matrix: [[(f64, f64); 2]; 2],
    pub nash: Vec<Profile>,
    /// `(profile, weak-dominance verdict, tremble verdict)` per equilibrium.
    pub thpe: Vec<(Profile, bool, bool)>,
    /// First `k` of the tremble tail on which each equilibrium holds.
    pub tremble_from: Vec<Option<u32>>,
    /// `(label, sequence length, verdict)` for the sample paths.
    pub spe: Vec<(String, usize, bool)>,
}

pub fn analyze(phi: f64, k_max: u32) -> Result<GameReport> {
    let game = StageGame::new(phi)?;
    let nash = pure_nash(&game);
    let thpe = nash
        .iter()
        .map(|&p| Ok((p, is_thpe(&game, p)?, thpe_tremble_check(&game, p, k_max))))
        .collect::<Result<Vec<_>>>()?;

    let tremble_from = nash
        .iter()
        .map(|&p| tremble_tail_start(&game, p, k_max))
        .collect();

    let alternating: Vec<Profile> = (0..10)
        .map(|t| {
            if t % 2 == 0 {
                Profile::BINARY
            } else {
                Profile::NONBINARY
            }
        })
        .collect();
    let mut with_miscoordination = alternating.clone();
    with_miscoordination[5] = Profile(Action::Binary, Action::Nonbinary);
    let samples = [
        ("constant binary", vec![Profile::BINARY; 10]),
        ("constant nonbinary", vec![Profile::NONBINARY; 10]),
        ("alternating", alternating),
        ("alternating with miscoordination", with_miscoordination),
    ];
    let spe = samples
        .into_iter()
        .map(|(label, seq)| {
            Ok((
                label.to_string(),
                seq.len(),
                verify_spe_sequence(&seq, phi)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GameReport {
        phi,
        k_max,
        matrix: game.matrix(),
        nash,
        thpe,
        tremble_from,
        spe,
    })
}

impl GameReport {
    /// Flat `key=value` summary.
    pub fn summary(&self) -> String {
        let mut out = format!("phi={}\nk_max={}\n", self.phi, self.k_max);
        let nash: Vec<String> = self.nash.iter().map(Profile::to_string).collect();
        out += &format!("nash={}\n", nash.join(";"));
        for (p, dom, trem) in &self.thpe {
            out += &format!("thpe.dominance.{p}={dom}\nthpe.tremble.{p}={trem}\n");
        }
        for (label, _, ok) in &self.spe {
            out += &format!("spe.{}={ok}\n", label.replace(' ', "_"));
        }
        out
    }
}

impl fmt::Display for GameReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Stage game, phi = {}", self.phi)?;
        writeln!(f, "{:>12} | {:>14} | {:>14}", "", "binary", "nonbinary")?;
        for (r, action) in Action::ALL.iter().enumerate() {
            let cell = |(a, b): (f64, f64)| format!("({a}, {b})");
            writeln!(
                f,
                "{:>12} | {:>14} | {:>14}",
                action.as_str(),
                cell(self.matrix[r][0]),
                cell(self.matrix[r][1])
            )?;
        }
        writeln!(f)?;
        writeln!(f, "Pure Nash equilibria:")?;
        for p in &self.nash {
            writeln!(f, "  {p}")?;
        }
        writeln!(f)?;
        writeln!(f, "Trembling-hand perfection (k_max = {}):", self.k_max)?;
        for ((p, dom, trem), from) in self.thpe.iter().zip(&self.tremble_from) {
            let verdict = if *dom && *trem {
                "perfect"
            } else if !dom && !trem {
                "not perfect"
            } else {
                "DISAGREEMENT"
            };
            let tail = match from {
                Some(k) => format!(" (best response for k = {k}..={})", self.k_max),
                None => String::new(),
            };
            writeln!(
                f,
                "  {p}: weak dominance -> {dom}, tremble sequence -> {trem}{tail} [{verdict}]"
            )?;
        }
        writeln!(f)?;
        writeln!(f, "Subgame perfection (one-stage deviation):")?;
        for (label, len, ok) in &self.spe {
            writeln!(
                f,
                "  {label} (length {len}): {}",
                if *ok { "accepted" } else { "rejected" }
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn game_payoffs() {
        let g = build_game(0.5).unwrap();
        assert_eq!(g.payoff(Profile::NONBINARY), (0.5, 0.5));
        assert_eq!(
            build_game(0.0).unwrap().payoff(Profile::NONBINARY),
            (0.0, 0.0)
        );
        for phi in [0.0, 0.3, 1.0] {
            let g = build_game(phi).unwrap();
            assert_eq!(
                g.payoff(Profile(Action::Binary, Action::Nonbinary)),
                (0.0, 0.0)
            );
            assert_eq!(
                g.payoff(Profile(Action::Nonbinary, Action::Binary)),
                (0.0, 0.0)
            );
            assert_eq!(g.payoff(Profile::BINARY), (0.5, 0.5));
        }
        assert!(build_game(1.2).is_err());
        assert!(build_game(-0.1).is_err());
    }

    #[test]
    fn nash_sets() {
        for phi in [0.0, 0.7, 1.0] {
            let g = build_game(phi).unwrap();
            assert_eq!(pure_nash(&g), vec![Profile::BINARY, Profile::NONBINARY]);
        }
        let g = build_game(1.0).unwrap();
        assert!(g.payoff(Profile::NONBINARY).0 > g.payoff(Profile::BINARY).0);
    }

    #[test]
    fn nash_symmetric_under_player_swap() {
        for i in 0..=10 {
            let g = build_game(i as f64 / 10.0).unwrap();
            let nash = pure_nash(&g);
            let mut swapped: Vec<Profile> = nash.iter().map(|p| p.swapped()).collect();
            swapped.sort();
            assert_eq!(nash, swapped);
        }
    }

    #[test]
    fn thpe_examples() {
        let g0 = build_game(0.0).unwrap();
        let g5 = build_game(0.5).unwrap();
        assert!(!is_thpe(&g0, Profile::NONBINARY).unwrap());
        assert!(is_thpe(&g5, Profile::NONBINARY).unwrap());
        assert!(is_thpe(&g0, Profile::BINARY).unwrap());
        assert!(matches!(
            is_thpe(&g5, Profile(Action::Binary, Action::Nonbinary)),
            Err(Error::NotNash(_))
        ));
    }

    #[test]
    fn tremble_examples() {
        assert!(thpe_tremble_check(
            &build_game(0.5).unwrap(),
            Profile::BINARY,
            100
        ));
        assert!(!thpe_tremble_check(
            &build_game(0.0).unwrap(),
            Profile::NONBINARY,
            100
        ));
        assert!(thpe_tremble_check(
            &build_game(1.0).unwrap(),
            Profile::NONBINARY,
            100
        ));
    }

    #[test]
    fn tremble_tail_for_small_phi() {
        // phi (1 - e) >= e / 2 needs e <= phi / (phi + 0.5): k >= 3 at phi = 0.1.
        let g = build_game(0.1).unwrap();
        assert_eq!(tremble_tail_start(&g, Profile::NONBINARY, 1000), Some(3));
        assert_eq!(tremble_tail_start(&g, Profile::BINARY, 1000), Some(1));
        assert_eq!(
            tremble_tail_start(&build_game(0.0).unwrap(), Profile::NONBINARY, 1000),
            None
        );
    }

    #[test]
    fn tremble_payoffs_match_hand_computation() {
        let g = build_game(0.0).unwrap();
        for k in [1, 10, 100] {
            let eps = tremble(k);
            let opp = MixedStrategy::trembling(Action::Nonbinary, eps);
            assert_eq!(g.expected_payoff(0, Action::Nonbinary, opp), 0.0);
            assert!((g.expected_payoff(0, Action::Binary, opp) - 0.5 * eps).abs() < 1e-15);
        }
    }

    #[test]
    fn dominance_and_tremble_agree_on_grid() {
        for i in 0..=10 {
            let g = build_game(i as f64 / 10.0).unwrap();
            for p in pure_nash(&g) {
                assert_eq!(
                    is_thpe(&g, p).unwrap(),
                    thpe_tremble_check(&g, p, 1000),
                    "{i} {p}"
                );
            }
        }
    }

    #[test]
    fn spe_sequences() {
        let alt: Vec<Profile> = (0..8)
            .map(|t| {
                if t % 2 == 0 {
                    Profile::BINARY
                } else {
                    Profile::NONBINARY
                }
            })
            .collect();
        assert!(verify_spe_sequence(&alt, 0.5).unwrap());
        assert!(verify_spe_sequence(&[Profile::BINARY], 0.5).unwrap());
        let mut bad = alt.clone();
        bad.push(Profile(Action::Binary, Action::Nonbinary));
        assert!(!verify_spe_sequence(&bad, 0.5).unwrap());
        assert!(!verify_spe_sequence(&[], 0.5).unwrap());
        assert!(verify_spe_sequence(&alt, 1.5).is_err());
    }

    #[test]
    fn spe_exhaustive_length_ten() {
        let profiles = Profile::all();
        for mask in 0u32..(1 << 10) {
            let seq: Vec<Profile> = (0..10)
                .map(|t| {
                    if mask >> t & 1 == 1 {
                        Profile::NONBINARY
                    } else {
                        Profile::BINARY
                    }
                })
                .collect();
            assert!(verify_spe_sequence(&seq, 0.5).unwrap());
            for off in &profiles[1..3] {
                for pos in [0, 9] {
                    let mut bad = seq.clone();
                    bad[pos] = *off;
                    assert!(!verify_spe_sequence(&bad, 0.5).unwrap());
                }
            }
        }
    }

    #[test]
    fn phi_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(compute_phi(0.0, 10_000, &mut rng).unwrap().estimate, 0.0);
        assert_eq!(compute_phi(1.0, 10_000, &mut rng).unwrap().estimate, 1.0);
        assert!(compute_phi(1.1, 10, &mut rng).is_err());
        assert!(compute_phi(0.5, 0, &mut rng).is_err());
    }

    #[test]
    fn phi_monotone_with_shared_stream() {
        let mut prev = 0.0;
        for i in 0..=20 {
            let b = i as f64 / 20.0;
            let est = compute_phi(b, 20_000, &mut ChaCha8Rng::seed_from_u64(10))
                .unwrap()
                .estimate;
            assert!(est >= prev);
            prev = est;
        }
    }

    #[test]
    fn report_renders() {
        let r = analyze(0.0, 100).unwrap();
        let text = r.to_string();
        assert!(text.contains("(nonbinary,nonbinary): weak dominance -> false"));
        assert!(r
            .summary()
            .contains("thpe.tremble.(nonbinary,nonbinary)=false"));
        assert!(r
            .summary()
            .contains("spe.alternating_with_miscoordination=false"));
        let r = analyze(0.5, 100).unwrap();
        assert!(r.thpe.iter().all(|&(_, d, t)| d && t));
    }
}
