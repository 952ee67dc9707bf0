//! Two teams of point-mass robots running the behavior stack and role
//! negotiation over a lossy, one-round-late message channel.
//!
//! Each team's authoritative role table lives with its server. Players act
//! on their own view of their role, which they update only from messages:
//! a grant promotes the receiver, a heartbeat heard by a stale striker
//! demotes it. The table is checked for a single striker every tick; the
//! players' views lag behind and are counted separately.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::behavior::{
    behavior_step, negotiate, should_request, take_over_from_silent_server, Assignments, ControlState, GameState,
    MessageKind, NegotiationContext, PlayerId, Pose2, Role, RoleMessage, Seen, Skill, WorldBelief, FIELD_LENGTH,
    FIELD_WIDTH, GOAL_WIDTH,
};

use super::log::{TrajectoryLog, Value};
use super::metrics::{Details, TeamMetrics};
use super::scenario::Scenario;
use super::walk::tick_count;
use super::{HarnessError, RunOutput};

/// Rounds after a teleport within which the swap is looked for.
const SWAP_HORIZON: u32 = 20;

/// One delivery attempt of a role message to one recipient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub team: usize,
    pub kind: MessageKind,
    pub sender: PlayerId,
    pub recipient: PlayerId,
    pub addressed: Option<PlayerId>,
    pub utility: f64,
    pub seq: u64,
    pub lost: bool,
}

#[derive(Debug, Clone)]
struct Player {
    id: PlayerId,
    team: usize,
    /// Pose in the team's own frame (attacking +x).
    pose: Pose2,
    home: [f64; 2],
    alive: bool,
    acting: Role,
    grantor: Option<PlayerId>,
    /// Last known server and its utility.
    server: Option<(PlayerId, f64)>,
    seq: u64,
    heard_server_at: f64,
    skill: Skill,
}

#[derive(Debug, Clone)]
struct Team {
    table: Assignments,
    /// Messages in flight, delivered at the next round: (recipient, message).
    in_flight: Vec<(PlayerId, RoleMessage)>,
}

/// Field frame to the frame of `team`; team 1 sees the field rotated by pi.
fn to_team(team: usize, p: [f64; 2]) -> [f64; 2] {
    if team == 0 {
        p
    } else {
        [-p[0], -p[1]]
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn initial_roles(n: u32) -> Vec<Role> {
    (0..n)
        .map(|i| match i {
            0 => Role::Striker,
            i if i == n - 1 && n >= 3 => Role::Goalie,
            _ => Role::Defender,
        })
        .collect()
}

fn home_for(role: Role, index: u32) -> [f64; 2] {
    match role {
        Role::Striker => [-1.0, 0.0],
        Role::Defender => [-4.0, if index % 2 == 1 { 1.0 } else { -1.0 }],
        Role::Goalie => [-0.5 * FIELD_LENGTH + 0.5, 0.0],
    }
}

struct Sim<'a> {
    s: &'a Scenario,
    rng: ChaCha8Rng,
    spread: Normal<f64>,
    players: Vec<Player>,
    teams: [Team; 2],
    ball: [f64; 2],
    ball_v: [f64; 2],
    metrics: TeamMetrics,
    trace: Vec<TraceRecord>,
    record: bool,
}

impl<'a> Sim<'a> {
    fn new(s: &'a Scenario, record: bool) -> Result<Self, HarnessError> {
        let n = s.team.players_per_team;
        let roles = initial_roles(n);
        let mut players = Vec::new();
        let mut teams = Vec::new();
        for team in 0..2 {
            let mut table = BTreeMap::new();
            for (i, role) in roles.iter().enumerate() {
                let id = team as u32 * n + i as u32 + 1;
                table.insert(id, *role);
                let home = home_for(*role, i as u32);
                players.push(Player {
                    id,
                    team,
                    pose: Pose2::new(home[0], home[1], 0.0),
                    home,
                    alive: true,
                    acting: *role,
                    grantor: None,
                    server: None,
                    seq: 0,
                    heard_server_at: 0.0,
                    skill: Skill::Stop,
                });
            }
            teams.push(Team {
                table: Assignments::new(table)?,
                in_flight: Vec::new(),
            });
        }
        let spread = Normal::new(0.0, s.team.kick_spread).map_err(|e| HarnessError::Config {
            path: "team.kick_spread".into(),
            message: e.to_string(),
        })?;
        let [a, b]: [Team; 2] = teams.try_into().expect("two teams");
        Ok(Self {
            s,
            rng: ChaCha8Rng::seed_from_u64(s.seed),
            spread,
            players,
            teams: [a, b],
            ball: [0.0, 0.0],
            ball_v: [0.0, 0.0],
            metrics: TeamMetrics {
                ticks: 0,
                rounds: 0,
                striker_violations: 0,
                acting_view_anomalies: 0,
                swaps: 0,
                rollbacks: 0,
                takeovers: 0,
                messages_sent: 0,
                messages_lost: 0,
                goals: [0, 0],
                teleport_swap_rounds: Vec::new(),
                role_changes: 0,
            },
            trace: Vec::new(),
            record,
        })
    }

    fn index(&self, id: PlayerId) -> usize {
        self.players.iter().position(|p| p.id == id).expect("known player")
    }

    fn utility(&self, idx: usize) -> f64 {
        let p = &self.players[idx];
        dist(p.pose.position(), to_team(p.team, self.ball))
    }

    /// Puts `msg` on the wire to every addressed teammate, each delivery
    /// independently subject to loss.
    fn send(&mut self, tick: u64, team: usize, msg: RoleMessage) {
        let recipients: Vec<PlayerId> = self
            .players
            .iter()
            .filter(|p| p.team == team && p.id != msg.sender)
            .filter(|p| msg.receiver.is_none_or(|r| r == p.id))
            .map(|p| p.id)
            .collect();
        for to in recipients {
            let lost = self.rng.random_bool(self.s.team.loss);
            self.metrics.messages_sent += 1;
            self.metrics.messages_lost += lost as u64;
            if self.record {
                self.trace.push(TraceRecord {
                    tick,
                    team,
                    kind: msg.kind,
                    sender: msg.sender,
                    recipient: to,
                    addressed: msg.receiver,
                    utility: msg.utility,
                    seq: msg.seq,
                    lost,
                });
            }
            if !lost {
                self.teams[team].in_flight.push((to, msg));
            }
        }
    }

    fn player_message(&mut self, idx: usize, kind: MessageKind, receiver: Option<PlayerId>) -> RoleMessage {
        let utility = self.utility(idx);
        let p = &mut self.players[idx];
        p.seq += 1;
        RoleMessage {
            kind,
            sender: p.id,
            receiver,
            utility,
            seq: p.seq,
        }
    }

    fn negotiation_round(&mut self, tick: u64, now: f64, events: &mut Vec<String>) -> Result<(), HarnessError> {
        self.metrics.rounds += 1;
        for team in 0..2 {
            let delivered = std::mem::take(&mut self.teams[team].in_flight);
            let mut inbox: BTreeMap<PlayerId, Vec<RoleMessage>> = BTreeMap::new();
            for (to, msg) in delivered {
                if self.players[self.index(to)].alive {
                    inbox.entry(to).or_default().push(msg);
                }
            }

            // the server first; it sees what was sent to it last round
            let server = self.teams[team].table.server().expect("table has a striker");
            let server_idx = self.index(server);
            if self.players[server_idx].alive {
                let ctx = NegotiationContext {
                    mode: self.s.team.mode,
                    server_utility: self.utility(server_idx),
                    hysteresis: self.s.team.hysteresis,
                    retries: self.s.team.retries,
                };
                let old = self.teams[team].table.clone();
                let mine = inbox.remove(&server).unwrap_or_default();
                let (table, outbox) = negotiate(&old, &mine, &ctx)?;
                if let (None, Some(h)) = (old.pending, table.pending) {
                    self.metrics.swaps += 1;
                    events.push(format!("swap:{}->{}", h.from, h.to));
                }
                if let (Some(h), None) = (old.pending, table.pending) {
                    if table.striker() == Some(h.from) {
                        self.metrics.rollbacks += 1;
                        events.push(format!("rollback:{}", h.to));
                    }
                }
                self.teams[team].table = table;
                for seq_msg in outbox {
                    // the server's sequence numbers come from the table
                    self.send(tick, team, seq_msg);
                }
                let p = &mut self.players[server_idx];
                p.heard_server_at = now;
                p.server = Some((server, ctx.server_utility));
            }

            let members: Vec<usize> = (0..self.players.len())
                .filter(|&i| self.players[i].team == team && self.players[i].alive && i != server_idx)
                .collect();
            for &i in &members {
                let msgs = inbox.remove(&self.players[i].id).unwrap_or_default();
                let mut ack = false;
                for m in &msgs {
                    let p = &mut self.players[i];
                    p.heard_server_at = now;
                    p.server = Some((m.sender, m.utility));
                    match m.kind {
                        MessageKind::Grant if m.receiver == Some(p.id) => {
                            p.acting = Role::Striker;
                            p.grantor = Some(m.sender);
                            ack = true;
                        }
                        MessageKind::Heartbeat if p.acting == Role::Striker => {
                            p.acting = Role::Defender;
                            p.grantor = None;
                        }
                        _ => {}
                    }
                }
                if ack {
                    let m = self.player_message(i, MessageKind::Heartbeat, None);
                    self.send(tick, team, m);
                    continue;
                }
                let p = &self.players[i];
                if let Some((srv, srv_util)) = p.server {
                    let own = self.utility(i);
                    if should_request(self.s.team.mode, p.acting, own, Some(srv_util), self.s.team.hysteresis) {
                        let m = self.player_message(i, MessageKind::Request, Some(srv));
                        self.send(tick, team, m);
                    }
                }
            }

            // lowest-id defender takes over from a server nobody hears
            let table = &self.teams[team].table;
            let alive: Vec<PlayerId> = self
                .players
                .iter()
                .filter(|p| p.team == team && p.alive)
                .map(|p| p.id)
                .collect();
            if let Some(successor) = alive
                .iter()
                .copied()
                .filter(|id| table.role(*id) == Some(Role::Defender))
                .min()
            {
                let silent_for = now - self.players[self.index(successor)].heard_server_at;
                if let Some(next) =
                    take_over_from_silent_server(table, silent_for, self.s.team.heartbeat_timeout, &alive)
                {
                    self.metrics.takeovers += 1;
                    events.push(format!("takeover:{}", successor));
                    self.teams[team].table = next;
                    let idx = self.index(successor);
                    self.players[idx].heard_server_at = now;
                }
            }

            // the server's own view is the table
            if let Some(srv) = self.teams[team].table.server() {
                let idx = self.index(srv);
                let role = self.teams[team].table.role(srv).expect("server in table");
                self.players[idx].acting = role;
            }
        }
        Ok(())
    }

    fn belief(&self, idx: usize) -> WorldBelief {
        let me = &self.players[idx];
        let seen = |p: &Player| Seen {
            position: to_team(me.team, to_field(p.team, p.pose.position())),
            velocity: [0.0, 0.0],
            age: 0.0,
        };
        WorldBelief {
            self_pose: me.pose,
            home: me.home,
            ball: Some(Seen {
                position: to_team(me.team, self.ball),
                velocity: to_team(me.team, self.ball_v),
                age: 0.0,
            }),
            teammates: self
                .players
                .iter()
                .filter(|p| p.team == me.team && p.id != me.id)
                .map(seen)
                .collect(),
            opponents: self.players.iter().filter(|p| p.team != me.team).map(seen).collect(),
        }
    }

    fn reset_after_goal(&mut self) {
        self.ball = [0.0, 0.0];
        self.ball_v = [0.0, 0.0];
        for p in &mut self.players {
            p.pose = Pose2::new(p.home[0], p.home[1], 0.0);
        }
    }

    fn move_ball(&mut self, dt: f64, events: &mut Vec<String>) {
        let speed = self.ball_v[0].hypot(self.ball_v[1]);
        if speed > 0.0 {
            let slowed = (speed - self.s.team.ball_deceleration * dt).max(0.0);
            let travel = 0.5 * (speed + slowed) * dt;
            self.ball[0] += self.ball_v[0] / speed * travel;
            self.ball[1] += self.ball_v[1] / speed * travel;
            self.ball_v = [self.ball_v[0] / speed * slowed, self.ball_v[1] / speed * slowed];
        }
        let half_l = 0.5 * FIELD_LENGTH;
        let half_w = 0.5 * FIELD_WIDTH;
        if self.ball[0].abs() > half_l {
            if self.ball[1].abs() < 0.5 * GOAL_WIDTH {
                let scorer = if self.ball[0] > 0.0 { 0 } else { 1 };
                self.metrics.goals[scorer] += 1;
                events.push(format!("goal:{scorer}"));
                self.reset_after_goal();
                return;
            }
            self.ball[0] = self.ball[0].signum() * (2.0 * half_l - self.ball[0].abs());
            self.ball_v[0] = -self.ball_v[0];
        }
        if self.ball[1].abs() > half_w {
            self.ball[1] = self.ball[1].signum() * (2.0 * half_w - self.ball[1].abs());
            self.ball_v[1] = -self.ball_v[1];
        }
    }

    fn nearest_field_player(&self, team: usize) -> Option<PlayerId> {
        self.players
            .iter()
            .filter(|p| p.team == team && p.alive && self.teams[team].table.role(p.id) != Some(Role::Goalie))
            .min_by(|a, b| {
                let da = dist(a.pose.position(), to_team(team, self.ball));
                let db = dist(b.pose.position(), to_team(team, self.ball));
                da.total_cmp(&db).then(a.id.cmp(&b.id))
            })
            .map(|p| p.id)
    }

    fn acting_strikers(&self, team: usize) -> usize {
        self.players
            .iter()
            .filter(|p| p.team == team && p.alive && p.acting == Role::Striker)
            .count()
    }
}

fn to_field(team: usize, p: [f64; 2]) -> [f64; 2] {
    // the team frame is its own inverse
    to_team(team, p)
}

fn columns(players: &[Player]) -> Vec<String> {
    let mut cols = vec!["ball_x".to_string(), "ball_y".to_string()];
    for p in players {
        for c in ["x", "y", "role", "skill"] {
            cols.push(format!("p{}_{}", p.id, c));
        }
    }
    cols.extend(
        ["striker_0", "striker_1", "goals_0", "goals_1", "events"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Striker => "striker",
        Role::Defender => "defender",
        Role::Goalie => "goalie",
    }
}

fn skill_name(s: Skill) -> &'static str {
    match s {
        Skill::Search => "search",
        Skill::Move => "move",
        Skill::Stop => "stop",
        Skill::Kick => "kick",
        Skill::Dribble => "dribble",
        Skill::Dive => "dive",
        Skill::Avoid => "avoid",
    }
}

/// Runs the game. The per-tick log and the message trace are only kept when
/// `record` is set.
pub fn team_play_sim(
    s: &Scenario,
    record: bool,
) -> Result<(TeamMetrics, Option<TrajectoryLog>, Vec<TraceRecord>), HarnessError> {
    let mut sim = Sim::new(s, record)?;
    let mut log = record.then(|| TrajectoryLog::new(&columns(&sim.players)));
    let game = GameState {
        control_state: ControlState::Play,
        mode: s.team.mode,
    };
    let ticks = tick_count(s, s.duration);
    let mut teleports: Vec<_> = s.team.teleports.clone();
    teleports.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut next_teleport = 0;
    // (target player, rounds elapsed) for each teleport awaiting its swap
    let mut watching: Option<(usize, PlayerId, u32)> = None;
    let mut order: Vec<usize> = (0..sim.players.len()).collect();

    for k in 0..ticks {
        let now = k as f64 * s.tick;
        let mut events = Vec::new();

        for c in &s.team.crashes {
            if (c.time - now).abs() < 0.5 * s.tick || (k == 0 && c.time < 0.0) {
                if let Some(i) = sim.players.iter().position(|p| p.id == c.player) {
                    sim.players[i].alive = false;
                    events.push(format!("crash:{}", c.player));
                }
            }
        }
        while let Some(t) = teleports.get(next_teleport).filter(|t| t.time <= now + 1e-9) {
            sim.ball = [t.x, t.y];
            sim.ball_v = [0.0, 0.0];
            events.push(format!("teleport:{:.6}:{:.6}", t.x, t.y));
            if let Some((slot, _, _)) = watching.take() {
                sim.metrics.teleport_swap_rounds[slot] = None;
            }
            let slot = sim.metrics.teleport_swap_rounds.len();
            match sim.nearest_field_player(0) {
                Some(id) if sim.teams[0].table.striker() == Some(id) => {
                    sim.metrics.teleport_swap_rounds.push(Some(0));
                }
                Some(id) => {
                    sim.metrics.teleport_swap_rounds.push(None);
                    watching = Some((slot, id, 0));
                }
                None => sim.metrics.teleport_swap_rounds.push(None),
            }
            next_teleport += 1;
        }

        if k % s.team.negotiation_period as u64 == 0 {
            let before: Vec<Role> = sim.players.iter().map(|p| p.acting).collect();
            sim.negotiation_round(k, now, &mut events)?;
            sim.metrics.role_changes += sim.players.iter().zip(&before).filter(|(p, r)| p.acting != **r).count() as u64;
            if let Some((slot, id, rounds)) = watching {
                let rounds = rounds + 1;
                if sim.teams[0].table.striker() == Some(id) {
                    sim.metrics.teleport_swap_rounds[slot] = Some(rounds);
                    watching = None;
                } else if rounds >= SWAP_HORIZON {
                    watching = None;
                } else {
                    watching = Some((slot, id, rounds));
                }
            }
        }

        order.shuffle(&mut sim.rng);
        let mut kicked = false;
        let mut commands = Vec::with_capacity(order.len());
        for &i in &order {
            if !sim.players[i].alive {
                continue;
            }
            let belief = sim.belief(i);
            let (_, out) = behavior_step(&game, sim.players[i].acting, &belief, &s.team.skills, &s.team.avoidance);
            sim.players[i].skill = out.skill;
            if out.skill == Skill::Kick && !kicked {
                let team = sim.players[i].team;
                if let Some(dir) = out.kick_direction {
                    let dir = dir + sim.spread.sample(&mut sim.rng);
                    let v = to_field(team, [s.team.kick_speed * dir.cos(), s.team.kick_speed * dir.sin()]);
                    sim.ball_v = v;
                    kicked = true;
                    events.push(format!("kick:{}", sim.players[i].id));
                }
            }
            commands.push((i, out.command));
        }
        for (i, cmd) in commands {
            let p = &mut sim.players[i];
            p.pose.x = (p.pose.x + cmd.velocity[0] * s.tick).clamp(-0.5 * FIELD_LENGTH, 0.5 * FIELD_LENGTH);
            p.pose.y = (p.pose.y + cmd.velocity[1] * s.tick).clamp(-0.5 * FIELD_WIDTH, 0.5 * FIELD_WIDTH);
            p.pose.theta = crate::gait::wrap_angle(p.pose.theta + cmd.turn_rate * s.tick);
        }
        sim.move_ball(s.tick, &mut events);

        for team in 0..2 {
            if sim.teams[team].table.striker_count() != 1 {
                sim.metrics.striker_violations += 1;
            }
            if sim.acting_strikers(team) != 1 {
                sim.metrics.acting_view_anomalies += 1;
            }
        }
        sim.metrics.ticks += 1;

        if let Some(log) = log.as_mut() {
            let mut row: Vec<Value> = vec![sim.ball[0].into(), sim.ball[1].into()];
            for p in &sim.players {
                let field = to_field(p.team, p.pose.position());
                row.push(field[0].into());
                row.push(field[1].into());
                row.push(if p.alive { role_name(p.acting) } else { "down" }.into());
                row.push(skill_name(p.skill).into());
            }
            for team in 0..2 {
                row.push(sim.teams[team].table.striker().map_or(0, |id| id as i64).into());
            }
            row.push(sim.metrics.goals[0].into());
            row.push(sim.metrics.goals[1].into());
            row.push(events.join(";").into());
            log.push((k + 1) as f64 * s.tick, row);
        }
    }
    Ok((sim.metrics, log, sim.trace))
}

pub fn run_team_play(s: &Scenario) -> Result<RunOutput, HarnessError> {
    let (metrics, log, trace) = team_play_sim(s, true)?;
    let mut violations = Vec::new();
    if metrics.striker_violations > 0 {
        violations.push(format!(
            "role table did not hold exactly one striker on {} ticks",
            metrics.striker_violations
        ));
    }
    let log = log.expect("recorded");
    let mut out = RunOutput::new(s, violations.is_empty(), violations, Details::Team(metrics), log);
    out.trace = trace;
    Ok(out)
}
