//! One module per subcommand. Each exposes
//! `run(ctx: &mut Ctx, cfg: &…Config) -> Result<(), CliError>` and writes
//! its artifacts through the context.

pub mod eliminate;
pub mod entangle;
pub mod feedforward;
pub mod meq;
pub mod ring_demo;
pub mod rwa;
pub mod scatter;
pub mod spectrum;
pub mod tune;
