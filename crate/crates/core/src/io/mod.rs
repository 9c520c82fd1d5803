//! Text formats, graph documents and renderings.

mod dot;
mod graph_doc;
mod model_file;
mod report;

pub use dot::export_dot;
pub use graph_doc::{model_hash, EdgeEntry, GraphDocument, Metadata, NodeEntry, GRAPH_FORMAT};
pub use model_file::{
    parse_model, render_csm, render_messages, render_model, render_statechart, render_system,
    ModelFile, SystemDecl, FORMAT_TAG, FORMAT_VERSION,
};
pub use report::{report_json, report_text, trace_json, trace_text};
