//! Decision policies mapping observable battle state to a legal action.
//!
//! The observation is limited to what a human player could see: their own
//! full team, the opponent's active species with HP fraction, and the
//! opponent's faint count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::battle::{Action, TeamState};
use crate::roster::{MoveDef, Roster, TypeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Random,
    Heuristic,
}

impl AgentKind {
    pub fn instantiate(self) -> Box<dyn Agent> {
        match self {
            AgentKind::Random => Box::new(RandomAgent),
            AgentKind::Heuristic => Box::new(HeuristicAgent),
        }
    }
}

/// A side's view of the battle.
pub struct Observation<'a> {
    pub roster: &'a Roster,
    pub my_team: &'a TeamState,
    /// Opponent's active character (species and types are public).
    pub opp_active: usize,
    pub opp_active_hp_fraction: f64,
    pub opp_fainted: usize,
}

pub trait Agent: Sync {
    fn choose(&self, obs: &Observation<'_>, legal: &[Action], rng: &mut ChaCha8Rng) -> Action;
}

/// Uniform sample over the legal action set.
pub struct RandomAgent;

impl Agent for RandomAgent {
    fn choose(&self, _obs: &Observation<'_>, legal: &[Action], rng: &mut ChaCha8Rng) -> Action {
        legal[rng.gen_range(0..legal.len())]
    }
}

/// Rule-based agent scoring moves by expected damage and switching when
/// clearly outmatched on types.
///
/// Rule order:
/// 1. on a forced switch, pick the living teammate with the best offensive
///    matchup against the opposing active;
/// 2. otherwise pick the legal move with the highest
///    `base_power * STAB * type_eff * accuracy`;
/// 3. if that best move is resisted (effectiveness < 1) and a teammate both
///    resists the opponent's types and has a super-effective move, switch to
///    the best such teammate.
///
/// All ties break toward the lowest slot index; the rng is unused.
pub struct HeuristicAgent;

/// Expected damage proxy for move ranking.
fn expected_damage(roster: &Roster, user_types: &[TypeId], m: &MoveDef, target: usize) -> f64 {
    if !m.is_damaging() {
        return 0.0;
    }
    let stab = if user_types.contains(&m.move_type) { 1.5 } else { 1.0 };
    let eff = roster
        .chart()
        .effectiveness(m.move_type, &roster.character(target).types);
    m.base_power as f64 * stab * eff * m.accuracy
}

/// Best expected damage any of `attacker`'s moves can deal to `target`.
fn matchup_score(roster: &Roster, attacker: usize, target: usize) -> f64 {
    let types = &roster.character(attacker).types;
    roster
        .moves_of(attacker)
        .map(|m| expected_damage(roster, types, m, target))
        .fold(0.0, f64::max)
}

impl Agent for HeuristicAgent {
    fn choose(&self, obs: &Observation<'_>, legal: &[Action], _rng: &mut ChaCha8Rng) -> Action {
        let roster = obs.roster;
        let target = obs.opp_active;
        let switches: Vec<(usize, Action)> = legal
            .iter()
            .filter_map(|&a| match a {
                Action::Switch(slot) => Some((slot, a)),
                _ => None,
            })
            .collect();
        let moves: Vec<(usize, Action)> = legal
            .iter()
            .filter_map(|&a| match a {
                Action::Move(slot) => Some((slot, a)),
                _ => None,
            })
            .collect();

        // Rule 1: forced switch.
        if moves.is_empty() {
            let best = switches
                .iter()
                .max_by(|(sa, _), (sb, _)| {
                    let ca = obs.my_team.members[*sa].character;
                    let cb = obs.my_team.members[*sb].character;
                    matchup_score(roster, ca, target)
                        .partial_cmp(&matchup_score(roster, cb, target))
                        .unwrap()
                        // Prefer the lower slot on ties: max_by keeps the
                        // later of equals, so order by reversed slot.
                        .then(sb.cmp(sa))
                })
                .expect("legal set is non-empty");
            return best.1;
        }

        // Rule 2: best move by expected damage, lowest slot on ties.
        let active = obs.my_team.active_battler().character;
        let active_types = &roster.character(active).types;
        let (best_slot, best_action) = *moves
            .iter()
            .max_by(|(sa, _), (sb, _)| {
                let ma = roster.move_def(roster.character(active).moves[*sa]);
                let mb = roster.move_def(roster.character(active).moves[*sb]);
                expected_damage(roster, active_types, ma, target)
                    .partial_cmp(&expected_damage(roster, active_types, mb, target))
                    .unwrap()
                    .then(sb.cmp(sa))
            })
            .unwrap();
        let best_move = roster.move_def(roster.character(active).moves[best_slot]);
        let best_eff = roster
            .chart()
            .effectiveness(best_move.move_type, &roster.character(target).types);

        // Rule 3: switch out of a resisted matchup when a teammate both
        // resists the opponent and hits back super-effectively.
        if best_eff < 1.0 {
            let opp_types = &roster.character(target).types;
            let qualifies = |slot: usize| {
                let c = obs.my_team.members[slot].character;
                let my_types = &roster.character(c).types;
                let defensive = opp_types
                    .iter()
                    .map(|&t| roster.chart().effectiveness(t, my_types))
                    .fold(0.0, f64::max);
                let offensive = roster.moves_of(c).any(|m| {
                    m.is_damaging()
                        && roster.chart().effectiveness(m.move_type, opp_types) >= 2.0
                });
                defensive < 1.0 && offensive
            };
            let best_switch = switches
                .iter()
                .filter(|(slot, _)| qualifies(*slot))
                .max_by(|(sa, _), (sb, _)| {
                    let ca = obs.my_team.members[*sa].character;
                    let cb = obs.my_team.members[*sb].character;
                    matchup_score(roster, ca, target)
                        .partial_cmp(&matchup_score(roster, cb, target))
                        .unwrap()
                        .then(sb.cmp(sa))
                });
            if let Some(&(_, action)) = best_switch {
                return action;
            }
        }
        best_action
    }
}
