//! The semantic type graph and the rules that move a state forward.

use std::sync::{Arc, OnceLock};

use crate::graph::TypeGraph;
use crate::spo::{Mark, Rule, RuleBuilder};
use crate::syntax::{ABSTRACT_NODE, CF_NODE, FAILURE, NEXT, START_NODE, STOP_NODE, SUCCESS};

pub const SEMANTICS_TYPEGRAPH: &str = "Semantics";

pub const SCOPE: &str = "Scope";
pub const ROOT_SCOPE: &str = "RootScope";
pub const JOIN_BRANCH_SCOPE: &str = "JoinBranchScope";
pub const SPLIT_BRANCH_SCOPE: &str = "SplitBranchScope";
pub const LOOP_BODY_SCOPE: &str = "LoopBodyScope";
pub const LOOP_EXIT_SCOPE: &str = "LoopExitScope";
pub const CF_VARIABLE: &str = "CFVariable";
pub const SCOPE_INSTANCE: &str = "ScopeInstance";
pub const VARIABLE_BINDING: &str = "VariableBinding";
pub const VARIABLE: &str = "Variable";
pub const POSITION_TOKEN: &str = "PositionToken";
pub const PATTERN_INVOCATION: &str = "PatternInvocation";

pub const CONTAINS: &str = "contains";
pub const PARENT: &str = "parent";
pub const DECLARES: &str = "declares";
pub const VISIBLE: &str = "visible";
pub const SUCCESS_SCOPE: &str = "successScope";
pub const FAILURE_SCOPE: &str = "failureScope";
pub const INSTANCE_OF: &str = "instanceOf";
pub const PARENT_INSTANCE: &str = "parentInstance";
pub const OWNER: &str = "owner";
pub const CF_VARIABLE_REF: &str = "cfVariable";
pub const VALUE: &str = "value";
pub const AT: &str = "at";
pub const SCOPE_REF: &str = "scope";
pub const INVOCATION: &str = "invocation";
pub const CONSTRUCTED: &str = "constructedVariables";
pub const DESTRUCTED: &str = "destructedVariables";

/// The syntax types plus scopes, variables, bindings, the position token
/// and pattern invocations.
pub fn semantics_typegraph() -> Arc<TypeGraph> {
    static TG: OnceLock<Arc<TypeGraph>> = OnceLock::new();
    TG.get_or_init(|| {
        let nodes = [
            (ABSTRACT_NODE, None),
            (CF_NODE, Some(ABSTRACT_NODE)),
            (START_NODE, Some(ABSTRACT_NODE)),
            (STOP_NODE, Some(ABSTRACT_NODE)),
            (SCOPE, None),
            (ROOT_SCOPE, Some(SCOPE)),
            (JOIN_BRANCH_SCOPE, Some(SCOPE)),
            (SPLIT_BRANCH_SCOPE, Some(SCOPE)),
            (LOOP_BODY_SCOPE, Some(SCOPE)),
            (LOOP_EXIT_SCOPE, Some(SCOPE)),
            (CF_VARIABLE, None),
            (SCOPE_INSTANCE, None),
            (VARIABLE_BINDING, None),
            (VARIABLE, None),
            (POSITION_TOKEN, None),
            (PATTERN_INVOCATION, None),
        ];
        let edges = [
            (NEXT, ABSTRACT_NODE, ABSTRACT_NODE),
            (SUCCESS, ABSTRACT_NODE, ABSTRACT_NODE),
            (FAILURE, ABSTRACT_NODE, ABSTRACT_NODE),
            (CONTAINS, SCOPE, ABSTRACT_NODE),
            (PARENT, SCOPE, SCOPE),
            (DECLARES, SCOPE, CF_VARIABLE),
            (VISIBLE, SCOPE, CF_VARIABLE),
            (SUCCESS_SCOPE, CF_NODE, SCOPE),
            (FAILURE_SCOPE, CF_NODE, SCOPE),
            (INSTANCE_OF, SCOPE_INSTANCE, SCOPE),
            (PARENT_INSTANCE, SCOPE_INSTANCE, SCOPE_INSTANCE),
            (OWNER, VARIABLE_BINDING, SCOPE_INSTANCE),
            (CF_VARIABLE_REF, VARIABLE_BINDING, CF_VARIABLE),
            (VALUE, VARIABLE_BINDING, VARIABLE),
            (AT, POSITION_TOKEN, ABSTRACT_NODE),
            (SCOPE_REF, POSITION_TOKEN, SCOPE_INSTANCE),
            (INVOCATION, CF_NODE, PATTERN_INVOCATION),
            (CONSTRUCTED, PATTERN_INVOCATION, CF_VARIABLE),
            (DESTRUCTED, PATTERN_INVOCATION, CF_VARIABLE),
        ];
        Arc::new(TypeGraph::new(SEMANTICS_TYPEGRAPH, nodes, edges).expect("semantic type graph is well formed"))
    })
    .clone()
}

/// Every rule the interpreter applies to a state. Node ids in the rules are
/// the handles callers pre-match.
#[derive(Debug)]
pub struct SemanticRules {
    /// Root scope instance plus token on the node after the start node.
    pub init: Rule,
    /// `b: i × x ↦ val`, unless `i` already binds `x`.
    pub bind: Rule,
    /// Removes the binding `b` of `x` in `i`.
    pub unbind: Rule,
    /// A fresh proxy `val` for a model node.
    pub new_variable: Rule,
    /// Removes a proxy no binding refers to.
    pub collect_variable: Rule,
    pub clear_invocation: Rule,
    pub record_invocation: Rule,
    pub mark_constructed: Rule,
    pub mark_destructed: Rule,
    /// Token moves along `next` / `success` / `failure`.
    pub shift_next: Rule,
    pub shift_success: Rule,
    pub shift_failure: Rule,
    /// Fresh child instance `c` of the branch scope; the token moves into it.
    pub enter_success: Rule,
    pub enter_failure: Rule,
    /// Copies a binding of parent `i` into child `c`.
    pub copy_binding: Rule,
    /// Applicable while the token's node lies outside its instance's scope.
    pub must_exit: Rule,
    /// Conservative: a parent binding without counterpart in the child dies.
    pub invalidate: Rule,
    /// Optimistic, joining branches only: a child binding replaces a
    /// different parent binding of the same variable...
    pub overwrite: Rule,
    /// ...or extends the parent.
    pub propagate: Rule,
    pub discard_binding: Rule,
    /// Deletes child instance `c`; the token returns to parent `i`.
    pub exit: Rule,
    /// Detaches the token from its node.
    pub untoken: Rule,
}

pub fn semantic_rules() -> &'static SemanticRules {
    static RULES: OnceLock<SemanticRules> = OnceLock::new();
    RULES.get_or_init(build)
}

fn build() -> SemanticRules {
    use Mark::*;
    let tg = semantics_typegraph();
    let r = |name: &str| RuleBuilder::new(name, &tg);
    let shift = |name: &str, ty: &str| {
        r(name)
            .keep("t", POSITION_TOKEN)
            .keep("n", ABSTRACT_NODE)
            .keep("m", ABSTRACT_NODE)
            .edge("t", AT, "n", Delete)
            .edge("n", ty, "m", Keep)
            .edge("t", AT, "m", Create)
    };
    let enter = |name: &str, scope_ref: &str| {
        r(name)
            .keep("t", POSITION_TOKEN)
            .keep("n", CF_NODE)
            .keep("i", SCOPE_INSTANCE)
            .keep("s", SCOPE)
            .create("c", SCOPE_INSTANCE)
            .edge("t", AT, "n", Keep)
            .edge("n", scope_ref, "s", Keep)
            .edge("t", SCOPE_REF, "i", Delete)
            .edge("c", INSTANCE_OF, "s", Create)
            .edge("c", PARENT_INSTANCE, "i", Create)
            .edge("t", SCOPE_REF, "c", Create)
    };
    let mark = |name: &str, ty: &str| {
        r(name)
            .keep("p", PATTERN_INVOCATION)
            .keep("x", CF_VARIABLE)
            .edge("p", ty, "x", Create)
            .edge("p", ty, "x", Forbid(0))
    };
    let rules = || -> Result<SemanticRules, crate::RuleError> {
        Ok(SemanticRules {
            init: r("init")
                .keep("s", START_NODE)
                .keep("n", ABSTRACT_NODE)
                .keep("r", ROOT_SCOPE)
                .create("i", SCOPE_INSTANCE)
                .create("t", POSITION_TOKEN)
                .forbid(0, "t0", POSITION_TOKEN)
                .edge("s", NEXT, "n", Keep)
                .edge("i", INSTANCE_OF, "r", Create)
                .edge("t", SCOPE_REF, "i", Create)
                .edge("t", AT, "n", Create)
                .build()?,
            bind: r("bind")
                .keep("i", SCOPE_INSTANCE)
                .keep("x", CF_VARIABLE)
                .keep("val", VARIABLE)
                .create("b", VARIABLE_BINDING)
                .forbid(0, "b0", VARIABLE_BINDING)
                .edge("b", OWNER, "i", Create)
                .edge("b", CF_VARIABLE_REF, "x", Create)
                .edge("b", VALUE, "val", Create)
                .edge("b0", OWNER, "i", Forbid(0))
                .edge("b0", CF_VARIABLE_REF, "x", Forbid(0))
                .build()?,
            unbind: r("unbind")
                .keep("i", SCOPE_INSTANCE)
                .keep("x", CF_VARIABLE)
                .delete("b", VARIABLE_BINDING)
                .edge("b", OWNER, "i", Delete)
                .edge("b", CF_VARIABLE_REF, "x", Delete)
                .build()?,
            new_variable: r("new-variable").create("val", VARIABLE).build()?,
            collect_variable: r("collect-variable")
                .delete("val", VARIABLE)
                .forbid(0, "b0", VARIABLE_BINDING)
                .edge("b0", VALUE, "val", Forbid(0))
                .build()?,
            clear_invocation: r("clear-invocation")
                .keep("n", CF_NODE)
                .delete("p", PATTERN_INVOCATION)
                .edge("n", INVOCATION, "p", Delete)
                .build()?,
            record_invocation: r("record-invocation")
                .keep("n", CF_NODE)
                .create("p", PATTERN_INVOCATION)
                .forbid(0, "p0", PATTERN_INVOCATION)
                .edge("n", INVOCATION, "p", Create)
                .edge("n", INVOCATION, "p0", Forbid(0))
                .build()?,
            mark_constructed: mark("mark-constructed", CONSTRUCTED).build()?,
            mark_destructed: mark("mark-destructed", DESTRUCTED).build()?,
            shift_next: shift("shift-next", NEXT).build()?,
            shift_success: shift("shift-success", SUCCESS).build()?,
            shift_failure: shift("shift-failure", FAILURE).build()?,
            enter_success: enter("enter-success", SUCCESS_SCOPE).build()?,
            enter_failure: enter("enter-failure", FAILURE_SCOPE).build()?,
            copy_binding: r("copy-binding")
                .keep("c", SCOPE_INSTANCE)
                .keep("i", SCOPE_INSTANCE)
                .keep("b", VARIABLE_BINDING)
                .keep("x", CF_VARIABLE)
                .keep("val", VARIABLE)
                .create("b2", VARIABLE_BINDING)
                .forbid(0, "b0", VARIABLE_BINDING)
                .edge("c", PARENT_INSTANCE, "i", Keep)
                .edge("b", OWNER, "i", Keep)
                .edge("b", CF_VARIABLE_REF, "x", Keep)
                .edge("b", VALUE, "val", Keep)
                .edge("b2", OWNER, "c", Create)
                .edge("b2", CF_VARIABLE_REF, "x", Create)
                .edge("b2", VALUE, "val", Create)
                .edge("b0", OWNER, "c", Forbid(0))
                .edge("b0", CF_VARIABLE_REF, "x", Forbid(0))
                .build()?,
            must_exit: r("must-exit")
                .keep("t", POSITION_TOKEN)
                .keep("n", ABSTRACT_NODE)
                .keep("c", SCOPE_INSTANCE)
                .keep("s", SCOPE)
                .keep("i", SCOPE_INSTANCE)
                .edge("t", AT, "n", Keep)
                .edge("t", SCOPE_REF, "c", Keep)
                .edge("c", INSTANCE_OF, "s", Keep)
                .edge("c", PARENT_INSTANCE, "i", Keep)
                .edge("s", CONTAINS, "n", Forbid(0))
                .build()?,
            invalidate: r("invalidate")
                .keep("c", SCOPE_INSTANCE)
                .keep("i", SCOPE_INSTANCE)
                .keep("x", CF_VARIABLE)
                .delete("b", VARIABLE_BINDING)
                .forbid(0, "b0", VARIABLE_BINDING)
                .edge("c", PARENT_INSTANCE, "i", Keep)
                .edge("b", OWNER, "i", Delete)
                .edge("b", CF_VARIABLE_REF, "x", Delete)
                .edge("b0", OWNER, "c", Forbid(0))
                .edge("b0", CF_VARIABLE_REF, "x", Forbid(0))
                .build()?,
            overwrite: r("overwrite")
                .keep("c", SCOPE_INSTANCE)
                .keep("cs", JOIN_BRANCH_SCOPE)
                .keep("i", SCOPE_INSTANCE)
                .keep("ps", SCOPE)
                .keep("x", CF_VARIABLE)
                .keep("cb", VARIABLE_BINDING)
                .keep("val", VARIABLE)
                .delete("b", VARIABLE_BINDING)
                .edge("c", INSTANCE_OF, "cs", Keep)
                .edge("c", PARENT_INSTANCE, "i", Keep)
                .edge("i", INSTANCE_OF, "ps", Keep)
                .edge("ps", VISIBLE, "x", Keep)
                .edge("cb", OWNER, "c", Keep)
                .edge("cb", CF_VARIABLE_REF, "x", Keep)
                .edge("cb", VALUE, "val", Keep)
                .edge("b", OWNER, "i", Delete)
                .edge("b", CF_VARIABLE_REF, "x", Delete)
                .edge("b", VALUE, "val", Forbid(0))
                .build()?,
            propagate: r("propagate")
                .keep("c", SCOPE_INSTANCE)
                .keep("cs", JOIN_BRANCH_SCOPE)
                .keep("i", SCOPE_INSTANCE)
                .keep("ps", SCOPE)
                .keep("x", CF_VARIABLE)
                .keep("cb", VARIABLE_BINDING)
                .keep("val", VARIABLE)
                .create("b", VARIABLE_BINDING)
                .forbid(0, "b0", VARIABLE_BINDING)
                .edge("c", INSTANCE_OF, "cs", Keep)
                .edge("c", PARENT_INSTANCE, "i", Keep)
                .edge("i", INSTANCE_OF, "ps", Keep)
                .edge("ps", VISIBLE, "x", Keep)
                .edge("cb", OWNER, "c", Keep)
                .edge("cb", CF_VARIABLE_REF, "x", Keep)
                .edge("cb", VALUE, "val", Keep)
                .edge("b", OWNER, "i", Create)
                .edge("b", CF_VARIABLE_REF, "x", Create)
                .edge("b", VALUE, "val", Create)
                .edge("b0", OWNER, "i", Forbid(0))
                .edge("b0", CF_VARIABLE_REF, "x", Forbid(0))
                .build()?,
            discard_binding: r("discard-binding")
                .keep("c", SCOPE_INSTANCE)
                .delete("b", VARIABLE_BINDING)
                .edge("b", OWNER, "c", Delete)
                .build()?,
            exit: r("exit")
                .keep("t", POSITION_TOKEN)
                .keep("i", SCOPE_INSTANCE)
                .delete("c", SCOPE_INSTANCE)
                .edge("t", SCOPE_REF, "c", Delete)
                .edge("c", PARENT_INSTANCE, "i", Delete)
                .edge("t", SCOPE_REF, "i", Create)
                .build()?,
            untoken: r("untoken")
                .keep("t", POSITION_TOKEN)
                .keep("n", ABSTRACT_NODE)
                .edge("t", AT, "n", Delete)
                .build()?,
        })
    };
    rules().expect("semantic rules are well formed")
}
