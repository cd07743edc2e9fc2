//! Prompt text for one context.

use prospect_core::prospects::{Context, ExplanationMode, Frame, PairOption, Prospect};

pub const EXPLICIT_CONTEXT: &str =
    "You will be provided with two options with different payoffs and uncertainties.";
pub const IMPLICIT_CONTEXT: &str =
    "You will be provided with two options that are histories of past payoffs.";

pub fn explanation_instruction(mode: ExplanationMode) -> &'static str {
    match mode {
        ExplanationMode::None => "Respond your choice with 'A' or 'B' only.",
        ExplanationMode::Short => {
            "Respond your choice with 'A' or 'B' plus one brief sentence for explanation."
        }
        ExplanationMode::Math => {
            "Respond your choice with 'A' or 'B' plus a brief mathematical explanation."
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub context_block: String,
    pub explanation_instruction: String,
    pub a_text: String,
    pub b_text: String,
}

impl PromptSpec {
    pub fn for_context(ctx: &Context) -> Self {
        let text = |slot: PairOption| option_text(ctx, ctx.order().option_in_slot(slot));
        Self {
            context_block: if ctx.is_implicit() {
                IMPLICIT_CONTEXT
            } else {
                EXPLICIT_CONTEXT
            }
            .to_string(),
            explanation_instruction: explanation_instruction(ctx.explanation()).to_string(),
            a_text: text(PairOption::A),
            b_text: text(PairOption::B),
        }
    }

    pub fn render(&self) -> String {
        format!(
            "{}\n\n{}\n\nOption A: {}\n\nOption B: {}",
            self.context_block, self.explanation_instruction, self.a_text, self.b_text
        )
    }
}

pub fn render_prompt(ctx: &Context) -> String {
    PromptSpec::for_context(ctx).render()
}

/// Text describing one pair option as shown in `ctx`.
pub fn option_text(ctx: &Context, option: PairOption) -> String {
    match ctx.histories() {
        Some(h) => {
            let idx = match option {
                PairOption::A => 0,
                PairOption::B => 1,
            };
            history_text(&h[idx].payoffs)
        }
        None => describe(ctx.framed_pair().option(option), ctx.frame()),
    }
}

pub fn history_text(payoffs: &[f64]) -> String {
    let items: Vec<String> = payoffs.iter().map(|x| format!("{}", *x as i64)).collect();
    format!("Past payoffs: {}", items.join(", "))
}

/// "Lose 5000 with probability 0.80; otherwise 0." style description of a
/// framed prospect with at most one nonzero outcome.
pub fn describe(p: &Prospect, frame: Frame) -> String {
    let verb = match frame {
        Frame::Gain => "Gain",
        Frame::Loss => "Lose",
    };
    let nonzero: Vec<_> = p.outcomes().iter().filter(|o| o.payoff != 0.0).collect();
    match nonzero.as_slice() {
        [] => "Nothing with certainty.".to_string(),
        [o] if o.probability == 1.0 => format!("{verb} {} with certainty.", o.payoff.abs()),
        [o] => format!(
            "{verb} {} with probability {:.2}; otherwise 0.",
            o.payoff.abs(),
            o.probability
        ),
        many => {
            let parts: Vec<String> = many
                .iter()
                .map(|o| format!("{} with probability {:.2}", o.payoff.abs(), o.probability))
                .collect();
            format!("{verb} {}; otherwise 0.", parts.join(", or "))
        }
    }
}
