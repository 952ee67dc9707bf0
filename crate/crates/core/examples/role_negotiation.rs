//! Two-player role negotiation: the defender closes in on the ball, asks
//! the striker for its role and confirms the grant with a heartbeat.

use std::collections::BTreeMap;

use humanoid_soccer::behavior::{
    negotiate, should_request, Assignments, GameMode, MessageKind, NegotiationContext, NegotiationError, Role,
    RoleMessage,
};

fn main() -> Result<(), NegotiationError> {
    let mut table = Assignments::new(BTreeMap::from([(1, Role::Striker), (2, Role::Defender)]))?;
    let mut inbox: Vec<RoleMessage> = Vec::new();
    let mut seq = 0;
    for round in 0..8 {
        // distances to the ball: player 2 approaches while player 1 stays
        let striker = table.server().unwrap_or(1);
        let utility = |id: u32| if id == 1 { 2.0 } else { 3.0 - 0.5 * round as f64 };
        let ctx = NegotiationContext::new(GameMode::Tournament, utility(striker));
        let (next, out) = negotiate(&table, &inbox, &ctx)?;
        inbox.clear();
        for m in &out {
            println!("round {round}: {:?} {} -> {:?}", m.kind, m.sender, m.receiver);
            if m.kind == MessageKind::Grant {
                if let Some(to) = m.receiver {
                    seq += 1;
                    inbox.push(RoleMessage {
                        kind: MessageKind::Heartbeat,
                        sender: to,
                        receiver: None,
                        utility: utility(to),
                        seq,
                    });
                }
            }
        }
        table = next;
        for (&id, &role) in &table.roles {
            if should_request(
                GameMode::Tournament,
                role,
                utility(id),
                Some(utility(striker)),
                ctx.hysteresis,
            ) {
                seq += 1;
                inbox.push(RoleMessage {
                    kind: MessageKind::Request,
                    sender: id,
                    receiver: Some(striker),
                    utility: utility(id),
                    seq,
                });
            }
        }
        println!(
            "round {round}: roles {:?}, strikers {}",
            table.roles,
            table.striker_count()
        );
    }
    Ok(())
}
