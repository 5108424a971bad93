//! Cost functions given as formulas in `x`.

use seek_core::CostFunction;

use crate::error::CliError;

#[cfg(feature = "expression")]
pub fn compile(expr: &str) -> Result<CostFunction, CliError> {
    use meval::{Context, Expr};

    thread_local! {
        static BUILTINS: Context<'static> = Context::new();
    }

    let parsed: Expr = expr
        .parse()
        .map_err(|e| CliError::config(format!("cannot parse expression `{expr}`: {e}")))?;
    // Rejects unknown names up front so evaluation cannot fail later.
    BUILTINS
        .with(|ctx| parsed.eval_with_context((("x", 0.0), ctx)))
        .map_err(|e| CliError::config(format!("expression `{expr}`: {e}")))?;
    Ok(CostFunction::new(expr, move |x| {
        BUILTINS.with(|ctx| {
            parsed
                .eval_with_context((("x", x), ctx))
                .unwrap_or(f64::NAN)
        })
    }))
}

#[cfg(not(feature = "expression"))]
pub fn compile(expr: &str) -> Result<CostFunction, CliError> {
    Err(CliError::config(format!(
        "expression cost `{expr}` needs a build with `--features expression`"
    )))
}
