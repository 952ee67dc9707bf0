//! Two-layer behavior: the upper layer maps game state and role to a
//! behavior mode, the lower layer turns the mode and world belief into a
//! skill and a motion command. Role changes between field players go
//! through [`negotiate`]; every motion command passes through
//! [`collision_avoidance`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

mod avoidance;
mod negotiation;

pub use avoidance::{collision_avoidance, AvoidanceConfig};
pub use negotiation::{
    negotiate, should_request, take_over_from_silent_server, Assignments, Handover, MessageKind, NegotiationContext,
    NegotiationError, PlayerId, RoleMessage,
};

/// Field length along x (m); the opponent goal is at `+FIELD_LENGTH / 2`.
pub const FIELD_LENGTH: f64 = 14.0;
pub const FIELD_WIDTH: f64 = 9.0;
pub const GOAL_WIDTH: f64 = 2.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlState {
    Initial,
    Ready,
    Set,
    Play,
    Finished,
}

impl ControlState {
    pub const ALL: [ControlState; 5] = [
        ControlState::Initial,
        ControlState::Ready,
        ControlState::Set,
        ControlState::Play,
        ControlState::Finished,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameMode {
    Tournament,
    DropIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub control_state: ControlState,
    pub mode: GameMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Striker,
    Defender,
    Goalie,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Striker, Role::Defender, Role::Goalie];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Skill {
    Search,
    Move,
    Stop,
    Kick,
    Dribble,
    Dive,
    Avoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorMode {
    Standby,
    WalkToKickoffPosition,
    AttackBall,
    DefendZone,
    GuardGoal,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Field-frame point expressed in this pose's frame.
    pub fn to_local(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        let (dx, dy) = (p[0] - self.x, p[1] - self.y);
        [c * dx + s * dy, -s * dx + c * dy]
    }
}

/// An object in the field frame and the time since it was last observed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Seen {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub age: f64,
}

/// What a player believes about the field, in a frame where its own team
/// attacks towards `+x`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldBelief {
    pub self_pose: Pose2,
    /// Assigned position for kickoff and zone defense.
    pub home: [f64; 2],
    pub ball: Option<Seen>,
    pub teammates: Vec<Seen>,
    pub opponents: Vec<Seen>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionCommand {
    /// Field-frame walking velocity (m/s).
    pub velocity: [f64; 2],
    /// Turn rate (rad/s).
    pub turn_rate: f64,
}

impl MotionCommand {
    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiveSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkillOutput {
    pub skill: Skill,
    pub command: MotionCommand,
    /// Kick direction in the field frame when the skill is a kick.
    pub kick_direction: Option<f64>,
    pub dive: Option<DiveSide>,
}

impl SkillOutput {
    fn new(skill: Skill, command: MotionCommand) -> Self {
        Self {
            skill,
            command,
            kick_direction: None,
            dive: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkillConfig {
    pub kick_range: f64,
    /// Largest heading error towards the goal that still allows a kick (rad).
    pub kick_alignment: f64,
    /// Beyond this age the ball counts as lost (s).
    pub ball_staleness: f64,
    /// An opponent this close to the ball makes the striker dribble.
    pub dribble_radius: f64,
    /// Ball speed towards the own goal that triggers a dive (m/s).
    pub dive_speed: f64,
    /// Only dive for shots reaching the goal line within this horizon (s).
    pub dive_horizon: f64,
    pub max_speed: f64,
    pub max_turn_rate: f64,
    pub search_turn_rate: f64,
    /// Distance behind the ball of the approach pose (m).
    pub approach_offset: f64,
    /// Targets closer than this count as reached (m).
    pub arrive_radius: f64,
}

impl Default for SkillConfig {
    fn default() -> Self {
        Self {
            kick_range: 0.3,
            kick_alignment: 10f64.to_radians(),
            ball_staleness: 3.0,
            dribble_radius: 0.7,
            dive_speed: 1.0,
            dive_horizon: 1.5,
            max_speed: 0.5,
            max_turn_rate: 1.0,
            search_turn_rate: 0.6,
            approach_offset: 0.25,
            arrive_radius: 0.1,
        }
    }
}

fn wrap(angle: f64) -> f64 {
    let r = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        PI
    } else {
        r
    }
}

pub fn opponent_goal() -> [f64; 2] {
    [0.5 * FIELD_LENGTH, 0.0]
}

pub fn own_goal() -> [f64; 2] {
    [-0.5 * FIELD_LENGTH, 0.0]
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn bearing(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

/// Proportional walk towards `target` while turning to `heading`.
fn walk_to(pose: &Pose2, target: [f64; 2], heading: f64, cfg: &SkillConfig) -> MotionCommand {
    let d = [target[0] - pose.x, target[1] - pose.y];
    let norm = d[0].hypot(d[1]);
    let speed = norm.min(cfg.max_speed);
    let velocity = if norm > 0.0 {
        [d[0] / norm * speed, d[1] / norm * speed]
    } else {
        [0.0, 0.0]
    };
    MotionCommand {
        velocity,
        turn_rate: wrap(heading - pose.theta).clamp(-cfg.max_turn_rate, cfg.max_turn_rate),
    }
}

fn move_or_stop(pose: &Pose2, target: [f64; 2], heading: f64, cfg: &SkillConfig) -> SkillOutput {
    if distance(pose.position(), target) <= cfg.arrive_radius {
        let cmd = MotionCommand {
            velocity: [0.0, 0.0],
            turn_rate: wrap(heading - pose.theta).clamp(-cfg.max_turn_rate, cfg.max_turn_rate),
        };
        SkillOutput::new(Skill::Stop, cmd)
    } else {
        SkillOutput::new(Skill::Move, walk_to(pose, target, heading, cfg))
    }
}

/// Upper layer: a total table over control state and role.
pub fn upper_fsm_step(game: &GameState, role: Role, _belief: &WorldBelief) -> BehaviorMode {
    match (game.control_state, role) {
        (ControlState::Initial | ControlState::Set | ControlState::Finished, _) => BehaviorMode::Standby,
        (ControlState::Ready, _) => BehaviorMode::WalkToKickoffPosition,
        (ControlState::Play, Role::Striker) => BehaviorMode::AttackBall,
        (ControlState::Play, Role::Defender) => BehaviorMode::DefendZone,
        (ControlState::Play, Role::Goalie) => BehaviorMode::GuardGoal,
    }
}

fn fresh_ball(belief: &WorldBelief, cfg: &SkillConfig) -> Option<Seen> {
    belief.ball.filter(|b| b.age <= cfg.ball_staleness)
}

fn attack(belief: &WorldBelief, cfg: &SkillConfig) -> SkillOutput {
    let pose = &belief.self_pose;
    let Some(ball) = fresh_ball(belief, cfg) else {
        let cmd = MotionCommand {
            velocity: [0.0, 0.0],
            turn_rate: cfg.search_turn_rate,
        };
        return SkillOutput::new(Skill::Search, cmd);
    };
    let goal_dir = bearing(ball.position, opponent_goal());
    let local = pose.to_local(ball.position);
    let dist = local[0].hypot(local[1]);
    let aligned = wrap(goal_dir - pose.theta).abs() <= cfg.kick_alignment && local[0] > 0.0;
    let contested = belief
        .opponents
        .iter()
        .any(|o| o.age <= cfg.ball_staleness && distance(o.position, ball.position) <= cfg.dribble_radius);

    if dist <= cfg.kick_range && contested {
        let velocity = [goal_dir.cos() * cfg.max_speed, goal_dir.sin() * cfg.max_speed];
        let cmd = MotionCommand {
            velocity,
            turn_rate: wrap(goal_dir - pose.theta).clamp(-cfg.max_turn_rate, cfg.max_turn_rate),
        };
        return SkillOutput::new(Skill::Dribble, cmd);
    }
    if dist <= cfg.kick_range && aligned {
        let mut out = SkillOutput::new(Skill::Kick, MotionCommand::default());
        out.kick_direction = Some(goal_dir);
        return out;
    }
    let approach = [
        ball.position[0] - cfg.approach_offset * goal_dir.cos(),
        ball.position[1] - cfg.approach_offset * goal_dir.sin(),
    ];
    SkillOutput::new(Skill::Move, walk_to(pose, approach, goal_dir, cfg))
}

/// Home position between the ball and the own goal.
fn defend(belief: &WorldBelief, cfg: &SkillConfig) -> SkillOutput {
    let pose = &belief.self_pose;
    let target = match fresh_ball(belief, cfg) {
        Some(ball) => {
            let goal = own_goal();
            [
                goal[0] + 0.4 * (ball.position[0] - goal[0]),
                goal[1] + 0.4 * (ball.position[1] - goal[1]),
            ]
        }
        None => belief.home,
    };
    let face = match fresh_ball(belief, cfg) {
        Some(ball) => bearing(pose.position(), ball.position),
        None => 0.0,
    };
    move_or_stop(pose, target, face, cfg)
}

/// Where a ball rolling with constant velocity crosses the own goal line, and
/// after how long.
fn goal_line_crossing(ball: &Seen) -> Option<(f64, f64)> {
    let line = own_goal()[0];
    let vx = ball.velocity[0];
    if vx >= 0.0 {
        return None;
    }
    let t = (line - ball.position[0]) / vx;
    (t >= 0.0).then(|| (t, ball.position[1] + ball.velocity[1] * t))
}

fn guard(belief: &WorldBelief, cfg: &SkillConfig) -> SkillOutput {
    let pose = &belief.self_pose;
    let ball = fresh_ball(belief, cfg);
    if let Some(b) = ball {
        let speed = b.velocity[0].hypot(b.velocity[1]);
        if let Some((t, y)) = goal_line_crossing(&b) {
            if speed >= cfg.dive_speed && t <= cfg.dive_horizon && y.abs() <= 0.5 * GOAL_WIDTH + 0.3 {
                let mut out = SkillOutput::new(Skill::Dive, MotionCommand::default());
                out.dive = Some(if y >= pose.y { DiveSide::Left } else { DiveSide::Right });
                return out;
            }
        }
    }
    let home = match ball {
        Some(b) => [
            belief.home[0],
            (0.5 * b.position[1]).clamp(-0.5 * GOAL_WIDTH, 0.5 * GOAL_WIDTH),
        ],
        None => belief.home,
    };
    let face = ball.map_or(0.0, |b| bearing(pose.position(), b.position));
    move_or_stop(pose, home, face, cfg)
}

/// Lower layer: chooses a skill and its motion command for the mode.
pub fn lower_fsm_step(mode: BehaviorMode, belief: &WorldBelief, cfg: &SkillConfig) -> SkillOutput {
    match mode {
        BehaviorMode::Standby => SkillOutput::new(Skill::Stop, MotionCommand::default()),
        BehaviorMode::WalkToKickoffPosition => move_or_stop(&belief.self_pose, belief.home, 0.0, cfg),
        BehaviorMode::AttackBall => attack(belief, cfg),
        BehaviorMode::DefendZone => defend(belief, cfg),
        BehaviorMode::GuardGoal => guard(belief, cfg),
    }
}

/// Both layers plus collision avoidance. A walking command bent by the
/// avoidance field is reported as the `Avoid` skill.
pub fn behavior_step(
    game: &GameState,
    role: Role,
    belief: &WorldBelief,
    skills: &SkillConfig,
    avoidance: &AvoidanceConfig,
) -> (BehaviorMode, SkillOutput) {
    let mode = upper_fsm_step(game, role, belief);
    let mut out = lower_fsm_step(mode, belief, skills);
    if matches!(out.skill, Skill::Move | Skill::Dribble) {
        let pose = belief.self_pose;
        let obstacles: Vec<[f64; 2]> = belief
            .teammates
            .iter()
            .chain(&belief.opponents)
            .map(|o| [o.position[0] - pose.x, o.position[1] - pose.y])
            .collect();
        let avoided = collision_avoidance(out.command, &obstacles, avoidance);
        if avoided != out.command {
            out.command = avoided;
            if out.skill == Skill::Move {
                out.skill = Skill::Avoid;
            }
        }
    }
    (mode, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn belief_with_ball(ball: [f64; 2], age: f64) -> WorldBelief {
        WorldBelief {
            self_pose: Pose2::new(0.0, 0.0, 0.0),
            home: [-3.0, 0.0],
            ball: Some(Seen {
                position: ball,
                velocity: [0.0, 0.0],
                age,
            }),
            ..Default::default()
        }
    }

    #[test]
    fn upper_table_is_total() {
        let belief = WorldBelief::default();
        for mode in [GameMode::Tournament, GameMode::DropIn] {
            for cs in ControlState::ALL {
                for role in Role::ALL {
                    let game = GameState {
                        control_state: cs,
                        mode,
                    };
                    let m = upper_fsm_step(&game, role, &belief);
                    let expected = match (cs, role) {
                        (ControlState::Ready, _) => BehaviorMode::WalkToKickoffPosition,
                        (ControlState::Play, Role::Striker) => BehaviorMode::AttackBall,
                        (ControlState::Play, Role::Defender) => BehaviorMode::DefendZone,
                        (ControlState::Play, Role::Goalie) => BehaviorMode::GuardGoal,
                        _ => BehaviorMode::Standby,
                    };
                    assert_eq!(m, expected);
                }
            }
        }
    }

    #[test]
    fn stale_ball_triggers_search() {
        let out = lower_fsm_step(
            BehaviorMode::AttackBall,
            &belief_with_ball([1.0, 0.0], 10.0),
            &SkillConfig::default(),
        );
        assert_eq!(out.skill, Skill::Search);
        assert!(out.command.turn_rate != 0.0);
    }

    #[test]
    fn close_aligned_ball_is_kicked() {
        let out = lower_fsm_step(
            BehaviorMode::AttackBall,
            &belief_with_ball([0.2, 0.0], 0.0),
            &SkillConfig::default(),
        );
        assert_eq!(out.skill, Skill::Kick);
        assert!(out.kick_direction.is_some());
    }

    #[test]
    fn misaligned_ball_is_approached() {
        let mut b = belief_with_ball([0.2, 0.0], 0.0);
        b.self_pose.theta = 0.5;
        let out = lower_fsm_step(BehaviorMode::AttackBall, &b, &SkillConfig::default());
        assert_eq!(out.skill, Skill::Move);
    }

    #[test]
    fn contested_ball_is_dribbled() {
        let mut b = belief_with_ball([0.2, 0.0], 0.0);
        b.opponents.push(Seen {
            position: [0.6, 0.0],
            ..Default::default()
        });
        let out = lower_fsm_step(BehaviorMode::AttackBall, &b, &SkillConfig::default());
        assert_eq!(out.skill, Skill::Dribble);
    }

    #[test]
    fn goalie_positions_for_midfield_ball() {
        let mut b = belief_with_ball([0.0, 0.0], 0.0);
        b.self_pose = Pose2::new(-5.0, 1.0, 0.0);
        b.home = [-6.5, 0.0];
        let out = lower_fsm_step(BehaviorMode::GuardGoal, &b, &SkillConfig::default());
        assert_eq!(out.skill, Skill::Move);
        assert!(out.command.velocity[0] < 0.0);
    }

    #[test]
    fn goalie_dives_for_fast_shot() {
        let mut b = belief_with_ball([-5.0, 0.0], 0.0);
        b.ball.as_mut().unwrap().velocity = [-3.0, 0.5];
        b.self_pose = Pose2::new(-6.5, 0.0, 0.0);
        let out = lower_fsm_step(BehaviorMode::GuardGoal, &b, &SkillConfig::default());
        assert_eq!(out.skill, Skill::Dive);
        assert_eq!(out.dive, Some(DiveSide::Left));
    }

    #[test]
    fn standby_stops() {
        let out = lower_fsm_step(BehaviorMode::Standby, &WorldBelief::default(), &SkillConfig::default());
        assert_eq!(out.skill, Skill::Stop);
        assert_eq!(out.command, MotionCommand::default());
    }

    #[test]
    fn blocked_move_becomes_avoid() {
        let mut b = belief_with_ball([3.0, 0.0], 0.0);
        b.opponents.push(Seen {
            position: [0.4, 0.0],
            ..Default::default()
        });
        let game = GameState {
            control_state: ControlState::Play,
            mode: GameMode::Tournament,
        };
        let (_, out) = behavior_step(
            &game,
            Role::Striker,
            &b,
            &SkillConfig::default(),
            &AvoidanceConfig::default(),
        );
        assert_eq!(out.skill, Skill::Avoid);
    }
}
