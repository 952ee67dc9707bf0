//! Striker-as-server role negotiation.
//!
//! The team's role table is owned by the server, which is the striker (or,
//! while a handover is unconfirmed, the striker that granted it). Only the
//! server changes the table. A grant demotes the server and promotes the
//! requester in one step, so the table always holds exactly one striker.
//! The new striker confirms with a heartbeat; unconfirmed grants are resent
//! a few times and then rolled back.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GameMode, Role};

pub type PlayerId = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NegotiationError {
    #[error("player {sender} sent a grant but is not the negotiation server")]
    ProtocolViolation { sender: PlayerId },
    #[error("role table must hold exactly one striker, found {0}")]
    StrikerCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Request,
    Grant,
    Deny,
    Heartbeat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoleMessage {
    pub kind: MessageKind,
    pub sender: PlayerId,
    /// `None` broadcasts to the whole team.
    pub receiver: Option<PlayerId>,
    /// Sender's distance to the ball (m).
    pub utility: f64,
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handover {
    pub from: PlayerId,
    pub to: PlayerId,
    pub retries_left: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignments {
    pub roles: BTreeMap<PlayerId, Role>,
    pub pending: Option<Handover>,
    /// Incremented on every change of the table.
    pub epoch: u64,
    /// Last sequence number sent by the server on behalf of each player.
    sent_seq: BTreeMap<PlayerId, u64>,
    /// Highest sequence number processed from each sender.
    seen_seq: BTreeMap<PlayerId, u64>,
}

impl Assignments {
    pub fn new(roles: BTreeMap<PlayerId, Role>) -> Result<Self, NegotiationError> {
        let table = Self {
            roles,
            pending: None,
            epoch: 0,
            sent_seq: BTreeMap::new(),
            seen_seq: BTreeMap::new(),
        };
        table.check()?;
        Ok(table)
    }

    pub fn striker_count(&self) -> usize {
        self.roles.values().filter(|r| **r == Role::Striker).count()
    }

    pub fn striker(&self) -> Option<PlayerId> {
        self.roles.iter().find(|(_, r)| **r == Role::Striker).map(|(id, _)| *id)
    }

    pub fn role(&self, id: PlayerId) -> Option<Role> {
        self.roles.get(&id).copied()
    }

    /// Player that runs the negotiation: the granting striker while a
    /// handover awaits confirmation, the striker otherwise.
    pub fn server(&self) -> Option<PlayerId> {
        self.pending.map(|h| h.from).or_else(|| self.striker())
    }

    fn check(&self) -> Result<(), NegotiationError> {
        match self.striker_count() {
            1 => Ok(()),
            n => Err(NegotiationError::StrikerCount(n)),
        }
    }

    fn next_seq(&mut self, id: PlayerId) -> u64 {
        let seq = self.sent_seq.entry(id).or_insert(0);
        *seq += 1;
        *seq
    }

    fn swap(&mut self, a: PlayerId, b: PlayerId) {
        let ra = self.roles[&a];
        let rb = self.roles[&b];
        self.roles.insert(a, rb);
        self.roles.insert(b, ra);
        self.epoch += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegotiationContext {
    pub mode: GameMode,
    /// The server's own distance to the ball (m).
    pub server_utility: f64,
    pub hysteresis: f64,
    /// Grant resends before an unconfirmed handover is rolled back.
    pub retries: u32,
}

impl NegotiationContext {
    pub fn new(mode: GameMode, server_utility: f64) -> Self {
        Self {
            mode,
            server_utility,
            hysteresis: 0.5,
            retries: 3,
        }
    }
}

/// Whether a field player should ask the striker for its role.
pub fn should_request(
    mode: GameMode,
    own_role: Role,
    own_utility: f64,
    striker_utility: Option<f64>,
    hysteresis: f64,
) -> bool {
    mode == GameMode::Tournament
        && own_role == Role::Defender
        && striker_utility.is_some_and(|s| own_utility + hysteresis < s)
}

/// One server round: processes the inbox and returns the new table and the
/// messages the server sends.
pub fn negotiate(
    assignments: &Assignments,
    inbox: &[RoleMessage],
    ctx: &NegotiationContext,
) -> Result<(Assignments, Vec<RoleMessage>), NegotiationError> {
    assignments.check()?;
    let server = assignments.server().ok_or(NegotiationError::StrikerCount(0))?;
    let mut table = assignments.clone();
    let mut outbox = Vec::new();

    let mut fresh = Vec::new();
    for msg in inbox {
        if msg.kind == MessageKind::Grant && msg.sender != server {
            return Err(NegotiationError::ProtocolViolation { sender: msg.sender });
        }
        if msg.sender == server || msg.receiver.is_some_and(|r| r != server) {
            continue;
        }
        let seen = table.seen_seq.entry(msg.sender).or_insert(0);
        if msg.seq <= *seen {
            continue;
        }
        *seen = msg.seq;
        fresh.push(*msg);
    }

    let mut send = |table: &mut Assignments, kind, receiver| {
        let seq = table.next_seq(server);
        outbox.push(RoleMessage {
            kind,
            sender: server,
            receiver,
            utility: ctx.server_utility,
            seq,
        });
    };

    let requests: Vec<RoleMessage> = fresh
        .iter()
        .filter(|m| m.kind == MessageKind::Request)
        .copied()
        .collect();

    if let Some(handover) = table.pending {
        let acked = fresh
            .iter()
            .any(|m| m.kind == MessageKind::Heartbeat && m.sender == handover.to);
        for r in &requests {
            if !acked || r.sender != handover.to {
                send(&mut table, MessageKind::Deny, Some(r.sender));
            }
        }
        if acked {
            table.pending = None;
        } else if handover.retries_left > 0 {
            table.pending = Some(Handover {
                retries_left: handover.retries_left - 1,
                ..handover
            });
            send(&mut table, MessageKind::Grant, Some(handover.to));
        } else {
            table.swap(handover.from, handover.to);
            table.pending = None;
            send(&mut table, MessageKind::Heartbeat, None);
        }
        return Ok((table, outbox));
    }

    let eligible = |m: &RoleMessage| {
        ctx.mode == GameMode::Tournament
            && table.role(m.sender) == Some(Role::Defender)
            && m.utility + ctx.hysteresis < ctx.server_utility
    };
    let winner = requests
        .iter()
        .filter(|m| eligible(m))
        .min_by(|a, b| a.utility.total_cmp(&b.utility).then(a.sender.cmp(&b.sender)))
        .map(|m| m.sender);

    for r in &requests {
        if Some(r.sender) != winner {
            send(&mut table, MessageKind::Deny, Some(r.sender));
        }
    }
    match winner {
        Some(to) => {
            table.swap(server, to);
            table.pending = Some(Handover {
                from: server,
                to,
                retries_left: ctx.retries,
            });
            send(&mut table, MessageKind::Grant, Some(to));
        }
        None => send(&mut table, MessageKind::Heartbeat, None),
    }
    Ok((table, outbox))
}

/// Lowest-id takeover when the server has been silent longer than
/// `timeout`. `alive` lists the players still participating. Returns the new
/// table when a takeover happens.
pub fn take_over_from_silent_server(
    assignments: &Assignments,
    silent_for: f64,
    timeout: f64,
    alive: &[PlayerId],
) -> Option<Assignments> {
    if silent_for <= timeout {
        return None;
    }
    let server = assignments.server()?;
    let successor = alive
        .iter()
        .copied()
        .filter(|id| *id != server && assignments.role(*id) == Some(Role::Defender))
        .min()?;
    let mut table = assignments.clone();
    if let Some(h) = table.pending.take() {
        // the silent server's unconfirmed grant is void
        table.roles.insert(h.to, Role::Defender);
        table.roles.insert(h.from, Role::Striker);
    }
    table.roles.insert(server, Role::Defender);
    table.roles.insert(successor, Role::Striker);
    table.epoch += 1;
    Some(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Assignments {
        Assignments::new(BTreeMap::from([
            (1, Role::Striker),
            (2, Role::Defender),
            (3, Role::Goalie),
        ]))
        .unwrap()
    }

    fn request(sender: PlayerId, utility: f64, seq: u64) -> RoleMessage {
        RoleMessage {
            kind: MessageKind::Request,
            sender,
            receiver: Some(1),
            utility,
            seq,
        }
    }

    fn ctx(server_utility: f64) -> NegotiationContext {
        NegotiationContext::new(GameMode::Tournament, server_utility)
    }

    #[test]
    fn no_messages_keep_roles() {
        let t = table();
        let (next, out) = negotiate(&t, &[], &ctx(2.0)).unwrap();
        assert_eq!(next.roles, t.roles);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind, MessageKind::Heartbeat);
    }

    #[test]
    fn clear_advantage_is_granted() {
        let (next, out) = negotiate(&table(), &[request(2, 1.0, 1)], &ctx(2.0)).unwrap();
        assert_eq!(next.role(2), Some(Role::Striker));
        assert_eq!(next.role(1), Some(Role::Defender));
        assert_eq!(next.striker_count(), 1);
        assert!(out
            .iter()
            .any(|m| m.kind == MessageKind::Grant && m.receiver == Some(2)));
    }

    #[test]
    fn hysteresis_blocks_small_advantage() {
        let (next, out) = negotiate(&table(), &[request(2, 1.8, 1)], &ctx(2.0)).unwrap();
        assert_eq!(next.roles, table().roles);
        assert!(out.iter().any(|m| m.kind == MessageKind::Deny && m.receiver == Some(2)));
    }

    #[test]
    fn drop_in_denies_everything() {
        let c = NegotiationContext::new(GameMode::DropIn, 5.0);
        let (next, out) = negotiate(&table(), &[request(2, 0.1, 1)], &c).unwrap();
        assert_eq!(next.roles, table().roles);
        assert_eq!(out[0].kind, MessageKind::Deny);
    }

    #[test]
    fn grant_from_non_server_is_a_violation() {
        let bad = RoleMessage {
            kind: MessageKind::Grant,
            sender: 2,
            receiver: Some(3),
            utility: 0.0,
            seq: 1,
        };
        assert_eq!(
            negotiate(&table(), &[bad], &ctx(2.0)),
            Err(NegotiationError::ProtocolViolation { sender: 2 })
        );
    }

    #[test]
    fn unacknowledged_grant_rolls_back() {
        let (mut t, _) = negotiate(&table(), &[request(2, 1.0, 1)], &ctx(2.0)).unwrap();
        for _ in 0..3 {
            let (next, out) = negotiate(&t, &[], &ctx(2.0)).unwrap();
            assert_eq!(out[0].kind, MessageKind::Grant);
            assert_eq!(next.striker_count(), 1);
            t = next;
        }
        let (t, out) = negotiate(&t, &[], &ctx(2.0)).unwrap();
        assert_eq!(t.role(1), Some(Role::Striker));
        assert!(t.pending.is_none());
        assert_eq!(out[0].kind, MessageKind::Heartbeat);
    }

    #[test]
    fn heartbeat_confirms_handover() {
        let (t, _) = negotiate(&table(), &[request(2, 1.0, 1)], &ctx(2.0)).unwrap();
        let ack = RoleMessage {
            kind: MessageKind::Heartbeat,
            sender: 2,
            receiver: None,
            utility: 1.0,
            seq: 2,
        };
        let (t, _) = negotiate(&t, &[ack], &ctx(2.0)).unwrap();
        assert!(t.pending.is_none());
        assert_eq!(t.server(), Some(2));
    }

    #[test]
    fn stale_sequence_numbers_are_ignored() {
        let (t, _) = negotiate(&table(), &[request(2, 1.8, 5)], &ctx(2.0)).unwrap();
        let (t, out) = negotiate(&t, &[request(2, 0.1, 4)], &ctx(2.0)).unwrap();
        assert_eq!(t.role(2), Some(Role::Defender));
        assert!(out.iter().all(|m| m.kind == MessageKind::Heartbeat));
    }

    #[test]
    fn silent_server_is_replaced_by_lowest_id() {
        let t = Assignments::new(BTreeMap::from([
            (1, Role::Striker),
            (2, Role::Defender),
            (4, Role::Defender),
        ]))
        .unwrap();
        assert!(take_over_from_silent_server(&t, 1.0, 2.0, &[2, 4]).is_none());
        let next = take_over_from_silent_server(&t, 2.5, 2.0, &[2, 4]).unwrap();
        assert_eq!(next.striker(), Some(2));
        assert_eq!(next.striker_count(), 1);
    }

    #[test]
    fn request_policy() {
        assert!(should_request(
            GameMode::Tournament,
            Role::Defender,
            1.0,
            Some(2.0),
            0.5
        ));
        assert!(!should_request(
            GameMode::Tournament,
            Role::Defender,
            1.6,
            Some(2.0),
            0.5
        ));
        assert!(!should_request(GameMode::DropIn, Role::Defender, 0.0, Some(2.0), 0.5));
        assert!(!should_request(GameMode::Tournament, Role::Goalie, 0.0, Some(2.0), 0.5));
    }
}
