//! Runtime side of the rhizome literature mapper: source clients, the LLM
//! agent layer, phase orchestration, the cartography document, and the
//! REST/SSE service.

pub mod abs;
pub mod agent;
pub mod cartography;
pub mod lenses;
pub mod pipeline;
pub mod rupture;
pub mod server;
pub mod sources;
pub mod synthesis;
pub mod topography;
