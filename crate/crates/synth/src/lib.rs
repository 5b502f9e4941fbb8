//! Program synthesis for generalized planning: prompt text, chat providers,
//! sandboxed execution of `get_plan` programs and the debugging loop.

pub mod exec;
pub mod llm;
pub mod program;
pub mod prompt;
pub mod session;

pub use exec::{ExecError, ExecutionOutcome, Executor, OutcomeKind, ProcessExecutor, SimulatedExecutor};
pub use llm::{query, ChatProvider, LlmError, ProviderConfig, ProviderKind, ReplayProvider, ScriptedProvider, Transcript};
pub use program::{accumulate, extract_code, ProgramSource};
pub use prompt::{
    abbreviate_task, build_feedback_prompt, build_stage_prompts, AbbreviationConfig, FeedbackConfig, FeedbackDetail,
    FeedbackKind, PromptMessage, PromptMode, Role,
};
pub use session::{
    classify, evaluate, synthesize, ErrorRecord, SessionError, SessionState, SynthesisConfig, SynthesisSession,
    TaskResult, Verdict,
};
