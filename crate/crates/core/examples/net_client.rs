//! Plays team 1 over TCP with the built-in herders.
//!
//! Start a server first:
//!   herdsim run --map pasture_small --team1 net:7001 --team2 builtin:random
//! then: cargo run --example net_client -- 127.0.0.1:7001
//!
//! With no address it hosts the match itself on a loopback port.

use std::net::TcpListener;
use std::time::Duration;

use herdsim::config::Params;
use herdsim::maps;
use herdsim::netmatch::{Client, NetController};
use herdsim::runner::{run_with_controllers, ControllerSpec, MatchConfig, RandomController};
use herdsim::world::{TeamId, WorldState};

fn main() {
    let params = Params::default();
    if let Some(addr) = std::env::args().nth(1) {
        let client = Client::connect(addr.as_str(), TeamId::ONE, None).unwrap();
        println!(
            "playing agents {:?} on a {}x{} map",
            client.agents, client.width, client.height
        );
        let summary = client.play_herders(&params).unwrap();
        println!("{summary:?}");
        return;
    }

    let cfg = MatchConfig::new(
        maps::PASTURE_SMALL,
        200,
        1,
        ControllerSpec::Net(0),
        ControllerSpec::Random,
    );
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let client = std::thread::spawn(move || {
        Client::connect(addr, TeamId::ONE, None)
            .unwrap()
            .play_herders(&Params::default())
            .unwrap()
    });
    let world = WorldState::new(&cfg.map_text, cfg.seed, &cfg.params).unwrap();
    let net = NetController::accept(
        listener,
        TeamId::ONE,
        &world,
        &cfg.params,
        None,
        Duration::from_secs(5),
    )
    .unwrap();
    let result = run_with_controllers(
        &cfg,
        Box::new(net),
        Box::new(RandomController::new(cfg.seed, TeamId::TWO)),
    )
    .unwrap();
    let summary = client.join().unwrap();
    println!("server: {:?} after {} steps", result.scores, result.steps);
    println!(
        "client: {} turns, scores {:?}, errors {:?}",
        summary.turns, summary.scores, summary.errors
    );
}
