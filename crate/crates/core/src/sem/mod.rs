//! Semantic tagging, case frame filling and relations read off telegraphic
//! sentence patterns.

mod form;
mod frames;
mod semlex;
mod structural;
mod tag;

pub use form::{parse_form, parse_frame, CaseFrame, FormConstraint, FormSyntaxError, Obligation, PhraseKind, Slot};
pub use frames::{fill_frames, ConceptInstance, FrameStyle, SlotFill};
pub use semlex::{SemCategory, SemEntry, SemLexicon, SemLexiconError};
pub use structural::{interpret_structure, parse_structural_rules, PatternItem, RelationInstance, RuleSyntaxError, StructuralRule};
pub use tag::{sem_tag, POS_ATTR};
