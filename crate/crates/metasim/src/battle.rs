//! Deterministic, seeded resolution of a single 6-vs-6 singles battle.
//!
//! All battlers are level 100 and use base stats directly; max HP is
//! `2 * base_hp + 110`. Both sides act simultaneously each turn: switches
//! resolve first, then moves in effective-speed order with speed ties broken
//! by a fair coin. A side whose active battler fainted gets a free switch
//! during which the opponent does not act.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::agents::{Agent, Observation};
use crate::rng::{self, Stream};
use crate::roster::{MoveCategory, MoveDef, Roster};

/// Battles that reach this many turns are scored by remaining battlers,
/// then remaining HP fraction, then a coin flip.
pub const TURN_CAP: u32 = 500;

pub const LEVEL: u32 = 100;

#[derive(Debug, Error)]
pub enum BattleError {
    #[error("team has a duplicate species at dense index {index}")]
    DuplicateSpecies { index: usize },
    #[error("damage requested for status move {id:?}")]
    StatusMove { id: String },
    #[error("action requested on a finished battle")]
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Action {
    /// Use the active battler's move in this slot (0-3).
    Move(usize),
    /// Switch to the teammate in this slot (0-5).
    Switch(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct BattlerState {
    pub character: usize,
    pub current_hp: u32,
    pub max_hp: u32,
}

impl BattlerState {
    pub fn fainted(&self) -> bool {
        self.current_hp == 0
    }

    pub fn hp_fraction(&self) -> f64 {
        self.current_hp as f64 / self.max_hp as f64
    }
}

#[derive(Debug, Clone)]
pub struct TeamState {
    pub members: [BattlerState; 6],
    pub active: usize,
}

impl TeamState {
    pub fn active_battler(&self) -> &BattlerState {
        &self.members[self.active]
    }

    pub fn living(&self) -> usize {
        self.members.iter().filter(|m| !m.fainted()).count()
    }

    pub fn fainted_count(&self) -> usize {
        6 - self.living()
    }

    fn hp_fraction_total(&self) -> f64 {
        self.members.iter().map(|m| m.hp_fraction()).sum()
    }
}

/// Max HP at level 100 without EV/IV terms.
pub fn max_hp(base_hp: u16) -> u32 {
    2 * base_hp as u32 + 110
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BattleResult {
    pub winner: Side,
    pub turns: u32,
    /// Dense roster indices: side A's six, then side B's six.
    pub participants: [usize; 12],
}

impl BattleResult {
    pub fn side(&self, side: Side) -> &[usize] {
        match side {
            Side::A => &self.participants[..6],
            Side::B => &self.participants[6..],
        }
    }
}

/// One JSON line per turn when battle logging is enabled.
#[derive(Debug, Clone, Serialize)]
pub struct TurnLog {
    pub turn: u32,
    pub actions: Vec<(Side, Action)>,
    pub damage: Vec<(Side, u32)>,
    pub faints: Vec<Side>,
}

pub struct BattleState<'a> {
    roster: &'a Roster,
    teams: [TeamState; 2],
    turn: u32,
    streams: BattleStreams,
}

struct BattleStreams {
    order: ChaCha8Rng,
    accuracy: ChaCha8Rng,
    crit: ChaCha8Rng,
    damage: ChaCha8Rng,
    agents: [ChaCha8Rng; 2],
}

impl BattleStreams {
    fn new(seed: u64) -> Self {
        Self {
            order: rng::stream_rng(seed, Stream::Order, 0),
            accuracy: rng::stream_rng(seed, Stream::Accuracy, 0),
            crit: rng::stream_rng(seed, Stream::Crit, 0),
            damage: rng::stream_rng(seed, Stream::Damage, 0),
            agents: [
                rng::stream_rng(seed, Stream::AgentA, 0),
                rng::stream_rng(seed, Stream::AgentB, 0),
            ],
        }
    }
}

impl<'a> BattleState<'a> {
    pub fn new(
        roster: &'a Roster,
        team_a: &[usize; 6],
        team_b: &[usize; 6],
        seed: u64,
    ) -> Result<Self, BattleError> {
        for team in [team_a, team_b] {
            for (i, &x) in team.iter().enumerate() {
                if team[..i].contains(&x) {
                    return Err(BattleError::DuplicateSpecies { index: x });
                }
            }
        }
        let make_team = |members: &[usize; 6]| TeamState {
            members: members.map(|c| {
                let hp = max_hp(roster.character(c).base_stats.hp);
                BattlerState {
                    character: c,
                    current_hp: hp,
                    max_hp: hp,
                }
            }),
            // Slot 0 always leads.
            active: 0,
        };
        Ok(Self {
            roster,
            teams: [make_team(team_a), make_team(team_b)],
            turn: 0,
            streams: BattleStreams::new(seed),
        })
    }

    pub fn team(&self, side: Side) -> &TeamState {
        &self.teams[side.index()]
    }

    pub fn turn(&self) -> u32 {
        self.turn
    }

    pub fn finished(&self) -> bool {
        self.teams.iter().any(|t| t.living() == 0)
    }

    /// Legal actions for one side: every move of a living active battler
    /// plus every switch to a living non-active teammate; switches only if
    /// the active battler has fainted.
    pub fn legal_actions(&self, side: Side) -> Result<Vec<Action>, BattleError> {
        if self.finished() {
            return Err(BattleError::Finished);
        }
        let team = self.team(side);
        let mut actions = Vec::new();
        if !team.active_battler().fainted() {
            let move_count = self.roster.character(team.active_battler().character).moves.len();
            for slot in 0..move_count {
                actions.push(Action::Move(slot));
            }
        }
        for (slot, member) in team.members.iter().enumerate() {
            if slot != team.active && !member.fainted() {
                actions.push(Action::Switch(slot));
            }
        }
        debug_assert!(!actions.is_empty());
        Ok(actions)
    }

    fn effective_speed(&self, side: Side) -> u16 {
        let team = self.team(side);
        self.roster.character(team.active_battler().character).base_stats.spe
    }

    fn apply_switch(&mut self, side: Side, slot: usize) {
        self.teams[side.index()].active = slot;
    }

    /// Execute a damaging move from `side`'s active battler at the
    /// opponent's active battler. Returns damage dealt.
    fn execute_move(&mut self, side: Side, slot: usize) -> u32 {
        let attacker_idx = self.team(side).active_battler().character;
        let move_idx = self.roster.character(attacker_idx).moves[slot];
        let move_def = self.roster.move_def(move_idx).clone();
        if !move_def.is_damaging() {
            return 0;
        }
        // Accuracy rolls before crit and damage.
        if !self.streams.accuracy.gen_bool(move_def.accuracy) {
            return 0;
        }
        let crit = self.streams.crit.gen_ratio(1, 24);
        let roll = self.streams.damage.gen_range(85..=100u32);
        let defender = self.teams[side.opponent().index()].active_battler().character;
        let damage = compute_damage_rolled(self.roster, attacker_idx, defender, &move_def, crit, roll);
        let target = &mut self.teams[side.opponent().index()];
        let b = &mut target.members[target.active];
        b.current_hp = b.current_hp.saturating_sub(damage);
        damage
    }

    /// Resolve one simultaneous turn given both sides' chosen actions.
    /// Switches resolve before moves; between two moves the faster active
    /// battler acts first (speed ties broken by a fair coin); a battler that
    /// faints before acting does not act.
    pub fn resolve_turn(&mut self, action_a: Action, action_b: Action) -> TurnLog {
        self.turn += 1;
        let mut log = TurnLog {
            turn: self.turn,
            actions: vec![(Side::A, action_a), (Side::B, action_b)],
            damage: Vec::new(),
            faints: Vec::new(),
        };
        let actions = [(Side::A, action_a), (Side::B, action_b)];
        for (side, action) in actions {
            if let Action::Switch(slot) = action {
                self.apply_switch(side, slot);
            }
        }
        let mut movers: Vec<Side> = actions
            .iter()
            .filter(|(_, a)| matches!(a, Action::Move(_)))
            .map(|&(s, _)| s)
            .collect();
        if movers.len() == 2 {
            let (sa, sb) = (self.effective_speed(Side::A), self.effective_speed(Side::B));
            let a_first = if sa != sb {
                sa > sb
            } else {
                self.streams.order.gen_bool(0.5)
            };
            if !a_first {
                movers.reverse();
            }
        }
        for side in movers {
            if self.team(side).active_battler().fainted() {
                continue;
            }
            let slot = match actions[side.index()].1 {
                Action::Move(slot) => slot,
                Action::Switch(_) => unreachable!(),
            };
            let damage = self.execute_move(side, slot);
            log.damage.push((side, damage));
            let opp = side.opponent();
            if self.team(opp).active_battler().fainted() {
                log.faints.push(opp);
            }
        }
        log
    }

    fn winner_at_cap(&mut self) -> Side {
        let (la, lb) = (self.team(Side::A).living(), self.team(Side::B).living());
        if la != lb {
            return if la > lb { Side::A } else { Side::B };
        }
        let (ha, hb) = (
            self.team(Side::A).hp_fraction_total(),
            self.team(Side::B).hp_fraction_total(),
        );
        if ha != hb {
            return if ha > hb { Side::A } else { Side::B };
        }
        if self.streams.order.gen_bool(0.5) {
            Side::A
        } else {
            Side::B
        }
    }

    fn agent_action(&mut self, agent: &dyn Agent, side: Side, legal: Vec<Action>) -> Action {
        let Self {
            roster,
            teams,
            streams,
            ..
        } = self;
        let opp = &teams[side.opponent().index()];
        let obs = Observation {
            roster,
            my_team: &teams[side.index()],
            opp_active: opp.active_battler().character,
            opp_active_hp_fraction: opp.active_battler().hp_fraction(),
            opp_fainted: opp.fainted_count(),
        };
        agent.choose(&obs, &legal, &mut streams.agents[side.index()])
    }
}

/// Closed-form damage with explicit crit flag and damage roll (85..=100).
///
/// Rounding order, each step floored on integers:
/// base = floor(42 * power * atk / (50 * def)) + 2, then crit (x1.5), then
/// the damage roll (x roll/100), then STAB (x1.5), then the composed type
/// effectiveness multiplier.
pub fn compute_damage_rolled(
    roster: &Roster,
    attacker: usize,
    defender: usize,
    move_def: &MoveDef,
    crit: bool,
    roll: u32,
) -> u32 {
    debug_assert!((85..=100).contains(&roll));
    let atk_char = roster.character(attacker);
    let def_char = roster.character(defender);
    let (a, d) = match move_def.category {
        MoveCategory::Physical => (atk_char.base_stats.atk, def_char.base_stats.def),
        MoveCategory::Special => (atk_char.base_stats.spa, def_char.base_stats.spd),
        MoveCategory::Status => return 0,
    };
    // (2 * 100 / 5 + 2) = 42 at level 100.
    let mut damage = ((2 * LEVEL / 5 + 2) as u64 * move_def.base_power as u64 * a as u64
        / (50 * d as u64)) as u64
        + 2;
    if crit {
        damage = damage * 3 / 2;
    }
    damage = damage * roll as u64 / 100;
    if atk_char.types.contains(&move_def.move_type) {
        damage = damage * 3 / 2;
    }
    let eff = roster.chart().effectiveness(move_def.move_type, &def_char.types);
    // Multipliers compose to {0, 0.25, 0.5, 1, 2, 4}; apply in quarters to
    // stay on integers.
    let quarters = (eff * 4.0).round() as u64;
    damage = damage * quarters / 4;
    damage as u32
}

/// Damage for a single move use, drawing crit and roll from `rng`.
/// Errors on status-category moves.
pub fn compute_damage(
    roster: &Roster,
    attacker: usize,
    defender: usize,
    move_def: &MoveDef,
    rng: &mut ChaCha8Rng,
) -> Result<u32, BattleError> {
    if !move_def.is_damaging() {
        return Err(BattleError::StatusMove {
            id: move_def.id.clone(),
        });
    }
    if !rng.gen_bool(move_def.accuracy) {
        return Ok(0);
    }
    let crit = rng.gen_ratio(1, 24);
    let roll = rng.gen_range(85..=100u32);
    Ok(compute_damage_rolled(roster, attacker, defender, move_def, crit, roll))
}

/// Run one battle to completion. Deterministic given teams, agents, and
/// seed. `log` collects one entry per turn when provided.
pub fn run_battle(
    roster: &Roster,
    team_a: &[usize; 6],
    team_b: &[usize; 6],
    agent_a: &dyn Agent,
    agent_b: &dyn Agent,
    seed: u64,
    mut log: Option<&mut Vec<TurnLog>>,
) -> Result<BattleResult, BattleError> {
    let mut state = BattleState::new(roster, team_a, team_b, seed)?;
    let mut participants = [0usize; 12];
    participants[..6].copy_from_slice(team_a);
    participants[6..].copy_from_slice(team_b);

    loop {
        if state.finished() {
            break;
        }
        if state.turn >= TURN_CAP {
            let winner = state.winner_at_cap();
            return Ok(BattleResult {
                winner,
                turns: state.turn,
                participants,
            });
        }
        let forced_a = state.team(Side::A).active_battler().fainted();
        let forced_b = state.team(Side::B).active_battler().fainted();
        if forced_a || forced_b {
            // Free switch: the opponent does not act this turn.
            state.turn += 1;
            let mut entry = TurnLog {
                turn: state.turn,
                actions: Vec::new(),
                damage: Vec::new(),
                faints: Vec::new(),
            };
            for (forced, side, agent) in
                [(forced_a, Side::A, agent_a), (forced_b, Side::B, agent_b)]
            {
                if forced {
                    let legal = state.legal_actions(side)?;
                    let action = state.agent_action(agent, side, legal);
                    if let Action::Switch(slot) = action {
                        state.apply_switch(side, slot);
                    }
                    entry.actions.push((side, action));
                }
            }
            if let Some(log) = log.as_deref_mut() {
                log.push(entry);
            }
            continue;
        }
        let legal_a = state.legal_actions(Side::A)?;
        let legal_b = state.legal_actions(Side::B)?;
        let action_a = state.agent_action(agent_a, Side::A, legal_a);
        let action_b = state.agent_action(agent_b, Side::B, legal_b);
        let entry = state.resolve_turn(action_a, action_b);
        if let Some(log) = log.as_deref_mut() {
            log.push(entry);
        }
    }
    let winner = if state.team(Side::A).living() > 0 {
        Side::A
    } else {
        Side::B
    };
    Ok(BattleResult {
        winner,
        turns: state.turn,
        participants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Agent, AgentKind, Observation};
    use crate::roster::{BaseStats, CharacterFile, MoveCategory, MoveFile, Roster, RosterFile};

    /// Three types: "phys" (neutral everywhere), "zap" (2x vs "ground",
    /// 0x vs "sky"... kept simple: zap 2x into ground, ground immune to zap?
    /// Chart rows are attacker-major.
    fn fixture() -> Roster {
        let types: Vec<String> = vec!["plain".into(), "zap".into(), "ground".into()];
        // plain neutral vs all; zap 2x vs ground is wrong for the immunity
        // example, so: zap 0x vs ground, zap 2x vs plain.
        let chart = vec![
            vec![1.0, 1.0, 1.0],
            vec![2.0, 1.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ];
        let moves = vec![
            MoveFile {
                id: "slam".into(),
                move_type: "plain".into(),
                base_power: 80,
                accuracy: 1.0,
                category: MoveCategory::Physical,
            },
            MoveFile {
                id: "bolt".into(),
                move_type: "zap".into(),
                base_power: 80,
                accuracy: 1.0,
                category: MoveCategory::Physical,
            },
            MoveFile {
                id: "nuke".into(),
                move_type: "plain".into(),
                base_power: 5000,
                accuracy: 1.0,
                category: MoveCategory::Physical,
            },
            MoveFile {
                id: "growl".into(),
                move_type: "plain".into(),
                base_power: 0,
                accuracy: 1.0,
                category: MoveCategory::Status,
            },
        ];
        let stats = BaseStats {
            hp: 100,
            atk: 100,
            def: 100,
            spa: 100,
            spd: 100,
            spe: 100,
        };
        let mk = |species: &str, t: &str, spe: u16, moves: Vec<&str>| CharacterFile {
            species: species.into(),
            types: vec![t.into()],
            base_stats: BaseStats { spe, ..stats },
            moves: moves.into_iter().map(String::from).collect(),
            tier: None,
        };
        let mut characters = vec![
            mk("neutral", "ground", 100, vec!["slam", "bolt", "growl"]),
            mk("zappy", "zap", 100, vec!["bolt", "slam"]),
            mk("grounded", "ground", 100, vec!["slam"]),
            mk("fast-nuke", "plain", 200, vec!["nuke"]),
            mk("slow-nuke", "plain", 50, vec!["nuke"]),
        ];
        for i in 0..12 {
            characters.push(mk(&format!("filler{i}"), "plain", 90, vec!["slam"]));
        }
        Roster::from_file(RosterFile {
            format_version: 1,
            types,
            chart,
            moves,
            characters,
        })
        .unwrap()
    }

    fn slam(roster: &Roster) -> MoveDef {
        roster.moves()[0].clone()
    }

    #[test]
    fn damage_neutral_hand_value() {
        // P=80, A=D, no STAB ("slam" is plain, attacker is ground typed),
        // neutral, no crit, max roll: floor(42*80/50) + 2 = 69.
        let roster = fixture();
        let a = roster.index_of("neutral").unwrap();
        let d = roster.index_of("grounded").unwrap();
        assert_eq!(compute_damage_rolled(&roster, a, d, &slam(&roster), false, 100), 69);
    }

    #[test]
    fn damage_stab_double_effectiveness() {
        // Same base 69, then STAB floor(69*3/2) = 103, then 2x -> 206.
        let roster = fixture();
        let a = roster.index_of("zappy").unwrap();
        let d = roster.index_of("fast-nuke").unwrap(); // plain, zap hits 2x
        let bolt = roster.moves()[1].clone();
        assert_eq!(compute_damage_rolled(&roster, a, d, &bolt, false, 100), 206);
    }

    #[test]
    fn damage_immunity_always_zero() {
        let roster = fixture();
        let a = roster.index_of("zappy").unwrap();
        let d = roster.index_of("grounded").unwrap(); // ground immune to zap
        let bolt = roster.moves()[1].clone();
        for crit in [false, true] {
            for roll in [85, 92, 100] {
                assert_eq!(compute_damage_rolled(&roster, a, d, &bolt, crit, roll), 0);
            }
        }
    }

    #[test]
    fn damage_crit_and_roll_floor_order() {
        // base 69, crit floor(69*3/2) = 103, roll 85: floor(103*85/100) = 87.
        let roster = fixture();
        let a = roster.index_of("neutral").unwrap();
        let d = roster.index_of("grounded").unwrap();
        assert_eq!(compute_damage_rolled(&roster, a, d, &slam(&roster), true, 85), 87);
    }

    #[test]
    fn status_move_is_an_error() {
        let roster = fixture();
        let growl = roster.moves()[3].clone();
        let mut rng = rng::stream_rng(0, Stream::Damage, 0);
        assert!(matches!(
            compute_damage(&roster, 0, 1, &growl, &mut rng),
            Err(BattleError::StatusMove { .. })
        ));
    }

    fn team_of(roster: &Roster, leads: &[&str]) -> [usize; 6] {
        let mut team = [0usize; 6];
        let mut next_filler = 0;
        for (i, slot) in team.iter_mut().enumerate() {
            *slot = if i < leads.len() {
                roster.index_of(leads[i]).unwrap()
            } else {
                let idx = roster.index_of(&format!("filler{next_filler}")).unwrap();
                next_filler += 1;
                idx
            };
        }
        team
    }

    #[test]
    fn legal_actions_counts() {
        let roster = fixture();
        let team_a = team_of(&roster, &["neutral"]);
        let team_b = team_of(&roster, &["zappy"]);
        let state = BattleState::new(&roster, &team_a, &team_b, 1).unwrap();
        // Active has 3 moves plus 5 living teammates.
        assert_eq!(state.legal_actions(Side::A).unwrap().len(), 8);
        assert_eq!(state.legal_actions(Side::B).unwrap().len(), 7);
    }

    #[test]
    fn forced_switch_offers_only_switches() {
        let roster = fixture();
        let team_a = team_of(&roster, &["neutral"]);
        let team_b = team_of(&roster, &["zappy"]);
        let mut state = BattleState::new(&roster, &team_a, &team_b, 1).unwrap();
        state.teams[0].members[0].current_hp = 0;
        state.teams[0].members[1].current_hp = 0;
        let legal = state.legal_actions(Side::A).unwrap();
        assert_eq!(legal.len(), 4);
        assert!(legal.iter().all(|a| matches!(a, Action::Switch(_))));
    }

    #[test]
    fn last_battler_single_move() {
        let roster = fixture();
        let team_a = team_of(&roster, &["grounded"]);
        let team_b = team_of(&roster, &["zappy"]);
        let mut state = BattleState::new(&roster, &team_a, &team_b, 1).unwrap();
        for slot in 1..6 {
            state.teams[0].members[slot].current_hp = 0;
        }
        let legal = state.legal_actions(Side::A).unwrap();
        assert_eq!(legal, vec![Action::Move(0)]);
    }

    #[test]
    fn both_switch_no_damage() {
        let roster = fixture();
        let team_a = team_of(&roster, &["neutral"]);
        let team_b = team_of(&roster, &["zappy"]);
        let mut state = BattleState::new(&roster, &team_a, &team_b, 1).unwrap();
        let log = state.resolve_turn(Action::Switch(2), Action::Switch(3));
        assert_eq!(state.team(Side::A).active, 2);
        assert_eq!(state.team(Side::B).active, 3);
        assert!(log.damage.is_empty());
        let full_hp = |t: &TeamState| t.members.iter().all(|m| m.current_hp == m.max_hp);
        assert!(full_hp(state.team(Side::A)) && full_hp(state.team(Side::B)));
    }

    #[test]
    fn faster_ko_preempts_slower_move() {
        let roster = fixture();
        let team_a = team_of(&roster, &["fast-nuke"]);
        let team_b = team_of(&roster, &["slow-nuke"]);
        let mut state = BattleState::new(&roster, &team_a, &team_b, 1).unwrap();
        let log = state.resolve_turn(Action::Move(0), Action::Move(0));
        // Only side A's move executed; B fainted before acting.
        assert_eq!(log.damage.len(), 1);
        assert_eq!(log.damage[0].0, Side::A);
        assert_eq!(log.faints, vec![Side::B]);
        assert!(state.team(Side::B).active_battler().fainted());
        assert!(!state.team(Side::A).active_battler().fainted());
    }

    #[test]
    fn speed_tie_order_reproducible() {
        let roster = fixture();
        let team_a = team_of(&roster, &["neutral"]);
        let team_b = team_of(&roster, &["zappy"]);
        let order_of = |seed: u64| {
            let mut state = BattleState::new(&roster, &team_a, &team_b, seed).unwrap();
            let log = state.resolve_turn(Action::Move(0), Action::Move(0));
            log.damage.iter().map(|&(s, _)| s).collect::<Vec<_>>()
        };
        for seed in 0..20 {
            assert_eq!(order_of(seed), order_of(seed));
        }
        // Both orders occur across seeds.
        let firsts: Vec<Side> = (0..64).map(|s| order_of(s)[0]).collect();
        assert!(firsts.contains(&Side::A) && firsts.contains(&Side::B));
    }

    #[test]
    fn dominant_team_always_wins() {
        // A's lead outspeeds everything and one-shots with a 5000-power
        // move; it sweeps all six defenders without ever being hit back.
        let roster = fixture();
        let team_a = team_of(&roster, &["fast-nuke"]);
        let team_b = team_of(&roster, &["neutral"]);
        let agent = AgentKind::Heuristic.instantiate();
        for seed in 0..20 {
            let r = run_battle(&roster, &team_a, &team_b, agent.as_ref(), agent.as_ref(), seed, None)
                .unwrap();
            assert_eq!(r.winner, Side::A);
        }
    }

    #[test]
    fn run_battle_deterministic() {
        let roster = fixture();
        let team_a = team_of(&roster, &["neutral", "zappy"]);
        let team_b = team_of(&roster, &["grounded", "fast-nuke"]);
        let agent = AgentKind::Random.instantiate();
        for seed in 0..30 {
            let a = run_battle(&roster, &team_a, &team_b, agent.as_ref(), agent.as_ref(), seed, None)
                .unwrap();
            let b = run_battle(&roster, &team_a, &team_b, agent.as_ref(), agent.as_ref(), seed, None)
                .unwrap();
            assert_eq!(a.winner, b.winner);
            assert_eq!(a.turns, b.turns);
        }
    }

    #[test]
    fn duplicate_species_rejected() {
        let roster = fixture();
        let mut team_a = team_of(&roster, &["neutral"]);
        team_a[5] = team_a[0];
        let team_b = team_of(&roster, &["zappy"]);
        assert!(matches!(
            BattleState::new(&roster, &team_a, &team_b, 0),
            Err(BattleError::DuplicateSpecies { .. })
        ));
    }

    #[test]
    fn hp_monotone_and_faints_nondecreasing() {
        // Step battles manually with random agents and check invariants
        // after every turn.
        let roster = fixture();
        let team_a = team_of(&roster, &["neutral", "zappy"]);
        let team_b = team_of(&roster, &["grounded", "fast-nuke"]);
        let agent = AgentKind::Random.instantiate();
        for seed in 0..10u64 {
            let mut state = BattleState::new(&roster, &team_a, &team_b, seed).unwrap();
            let mut prev_hp: Vec<u32> = state
                .teams
                .iter()
                .flat_map(|t| t.members.iter().map(|m| m.current_hp))
                .collect();
            let mut prev_faints = 0;
            while !state.finished() && state.turn < TURN_CAP {
                for side in [Side::A, Side::B] {
                    if state.team(side).active_battler().fainted() {
                        let legal = state.legal_actions(side).unwrap();
                        if let Action::Switch(slot) = state.agent_action(agent.as_ref(), side, legal)
                        {
                            state.apply_switch(side, slot);
                        }
                    }
                }
                if state.finished() {
                    break;
                }
                let la = state.legal_actions(Side::A).unwrap();
                let lb = state.legal_actions(Side::B).unwrap();
                let aa = state.agent_action(agent.as_ref(), Side::A, la);
                let ab = state.agent_action(agent.as_ref(), Side::B, lb);
                state.resolve_turn(aa, ab);
                let hp: Vec<u32> = state
                    .teams
                    .iter()
                    .flat_map(|t| t.members.iter().map(|m| m.current_hp))
                    .collect();
                for (now, before) in hp.iter().zip(&prev_hp) {
                    assert!(now <= before, "HP increased");
                }
                let faints = state.teams.iter().map(|t| t.fainted_count()).sum::<usize>();
                assert!(faints >= prev_faints);
                prev_hp = hp;
                prev_faints = faints;
            }
        }
    }

    #[test]
    fn observation_hides_opponent_bench() {
        // Compile-time shape check: the observation only carries the
        // opponent's active index, HP fraction, and faint count.
        let roster = fixture();
        let team_a = team_of(&roster, &["neutral"]);
        let state_team = TeamState {
            members: team_a.map(|c| {
                let hp = max_hp(roster.character(c).base_stats.hp);
                BattlerState {
                    character: c,
                    current_hp: hp,
                    max_hp: hp,
                }
            }),
            active: 0,
        };
        let obs = Observation {
            roster: &roster,
            my_team: &state_team,
            opp_active: 1,
            opp_active_hp_fraction: 1.0,
            opp_fainted: 0,
        };
        assert_eq!(obs.opp_fainted, 0);
    }
}
