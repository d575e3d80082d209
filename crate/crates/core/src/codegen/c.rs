// SPDX-License-Identifier: Apache-2.0

//! C backend for software classes.
//!
//! Each software instance owns a FIFO of pending events stamped with a global
//! sequence number; `sm_step` dispatches the oldest head, mirroring the
//! reference scheduler. Sends to hardware instances are packed into payload
//! words and handed to `bus_send`.

use std::fmt::Write;

use super::manifest::InterfaceManifest;
use super::sanitize;
use crate::ir::{ActionStmt, BinaryOp, ClassDef, Expr, Model, UnaryOp};
use crate::partition::{Direction, Domain, Partition};
use crate::scalar::{Literal, ScalarType};
use crate::typing::{infer, ExprType, TypeEnv};
use crate::validate::ActionEnv;

const QUEUE_DEPTH: u32 = 16;

fn c_type(ty: ScalarType) -> &'static str {
    match ty {
        ScalarType::Bool | ScalarType::U8 => "uint8_t",
        ScalarType::U16 => "uint16_t",
        ScalarType::U32 => "uint32_t",
    }
}

fn payload_words(bits: u32) -> u32 {
    bits.div_ceil(32).max(1)
}

/// Returns `(source, header)`.
pub fn emit_c(name: &str, model: &Model, partition: &Partition, manifest: &InterfaceManifest) -> (String, String) {
    let emitter = Emitter {
        name,
        model,
        partition,
        manifest,
    };
    (emitter.source(), emitter.header())
}

struct Emitter<'a> {
    name: &'a str,
    model: &'a Model,
    partition: &'a Partition,
    manifest: &'a InterfaceManifest,
}

impl<'a> Emitter<'a> {
    fn sw_classes(&self) -> impl Iterator<Item = &'a ClassDef> + '_ {
        self.model
            .classes
            .iter()
            .filter(|c| self.partition.domain(&c.name) == Domain::Sw)
    }

    fn is_sw_instance(&self, instance: &str) -> bool {
        self.model
            .instance(instance)
            .is_some_and(|i| self.partition.domain(&i.class) == Domain::Sw)
    }

    /// Position of `instance` among the instances of its class.
    fn instance_slot(&self, instance: &str) -> usize {
        let class = self.model.instance(instance).map(|i| i.class.as_str()).unwrap_or("");
        self.model
            .instances_of(class)
            .position(|i| i.name == instance)
            .unwrap_or(0)
    }

    fn max_args(&self) -> usize {
        self.sw_classes()
            .flat_map(|c| c.signals.iter().map(|s| s.params.len()))
            .max()
            .unwrap_or(0)
            .max(1)
    }

    fn injection_prototypes(&self) -> Vec<String> {
        let mut out = Vec::new();
        for inst in &self.model.instances {
            if !self.is_sw_instance(&inst.name) {
                continue;
            }
            let Some(class) = self.model.class(&inst.class) else {
                continue;
            };
            for sig in &class.signals {
                let params: Vec<String> = sig
                    .params
                    .iter()
                    .map(|p| format!("{} p_{}", c_type(p.ty), p.name))
                    .collect();
                let params = if params.is_empty() {
                    "void".to_string()
                } else {
                    params.join(", ")
                };
                out.push(format!("void inject_{}_{}({params})", inst.name, sig.name));
            }
        }
        out
    }

    fn header(&self) -> String {
        let base = sanitize(self.name);
        let guard = format!("{}_SW_H", base.to_ascii_uppercase());
        let mut h = String::new();
        let _ = writeln!(h, "/* {}_sw.h: software half of model `{}`. Generated; do not edit. */", self.name, self.name);
        let _ = writeln!(h, "#ifndef {guard}");
        let _ = writeln!(h, "#define {guard}");
        h.push('\n');
        h.push_str("#include <stdint.h>\n\n");
        let _ = writeln!(h, "/* Boundary signals, interface manifest {}. */", self.manifest.model_hash);
        for s in &self.manifest.signals {
            let _ = writeln!(h, "#define {} {}", s.macro_name(), s.id);
            let _ = writeln!(h, "#define {} {}", s.bits_name(), s.payload_total_bits);
        }
        h.push('\n');
        h.push_str("/* Provided by the bus driver: deliver a packed payload to hardware. */\n");
        h.push_str("void bus_send(uint32_t id, uint32_t instance, const uint32_t *payload);\n\n");
        h.push_str("/* Called by the bus driver for every payload addressed to software. */\n");
        h.push_str("void dispatch_from_bus(uint32_t id, uint32_t instance, const uint32_t *payload);\n\n");
        h.push_str("void sm_init(void);\n");
        h.push_str("/* Dispatches one pending event; returns 0 when every queue is empty. */\n");
        h.push_str("int sm_step(void);\n");
        h.push_str("void sm_run(void);\n");
        let injections = self.injection_prototypes();
        if !injections.is_empty() {
            h.push('\n');
            for p in injections {
                let _ = writeln!(h, "{p};");
            }
        }
        h.push('\n');
        let _ = writeln!(h, "#endif /* {guard} */");
        h
    }

    fn source(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "/* {}_sw.c: software half of model `{}`. Generated; do not edit. */", self.name, self.name);
        let _ = writeln!(s, "#include \"{}_sw.h\"", self.name);
        s.push('\n');
        let _ = writeln!(s, "#define SM_QUEUE_DEPTH {QUEUE_DEPTH}u");
        let _ = writeln!(s, "#define SM_MAX_ARGS {}u", self.max_args());
        s.push_str(RUNTIME);

        let sw_instances: Vec<_> = self
            .model
            .instances
            .iter()
            .filter(|i| self.is_sw_instance(&i.name))
            .collect();
        for class in self.sw_classes() {
            self.class_types(&mut s, class);
        }
        if !sw_instances.is_empty() {
            s.push('\n');
            for inst in &sw_instances {
                let _ = writeln!(s, "static void sm_post_{}(uint32_t sig, const uint32_t *args);", inst.name);
            }
        }
        for class in self.sw_classes() {
            self.class_functions(&mut s, class);
        }

        if !sw_instances.is_empty() {
            s.push_str("\n/* ---- instances ---- */\n\n");
            for inst in &sw_instances {
                let _ = writeln!(s, "static sm_{}_t sm_inst_{};", inst.class, inst.name);
            }
            for inst in &sw_instances {
                let _ = writeln!(
                    s,
                    "\nstatic void sm_post_{n}(uint32_t sig, const uint32_t *args)\n{{\n    sm_queue_push(&sm_inst_{n}.queue, sig, args);\n}}",
                    n = inst.name
                );
            }
        }

        // Scheduler.
        s.push_str("\nvoid sm_init(void)\n{\n    /* Not every partition uses every helper. */\n    (void)sm_queue_push;\n    (void)sm_queue_pop;\n    (void)sm_queue_head;\n    (void)sm_pack;\n    (void)sm_unpack;\n    sm_next_seq = 0u;\n");
        for inst in &sw_instances {
            let _ = writeln!(s, "    sm_{}_init(&sm_inst_{});", inst.class, inst.name);
        }
        s.push_str("}\n\nint sm_step(void)\n{\n");
        if sw_instances.is_empty() {
            s.push_str("    return 0;\n}\n");
        } else {
            s.push_str("    sm_queue_t *best = 0;\n    int which = -1;\n    sm_event_t ev;\n\n");
            for (k, inst) in sw_instances.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "    if (sm_inst_{n}.queue.count != 0u && (best == 0 || sm_queue_head(&sm_inst_{n}.queue) < sm_queue_head(best))) {{\n        best = &sm_inst_{n}.queue;\n        which = {k};\n    }}",
                    n = inst.name
                );
            }
            s.push_str("    if (best == 0) {\n        return 0;\n    }\n    sm_queue_pop(best, &ev);\n    switch (which) {\n");
            for (k, inst) in sw_instances.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "    case {k}:\n        sm_{}_dispatch(&sm_inst_{}, &ev);\n        break;",
                    inst.class, inst.name
                );
            }
            s.push_str("    default:\n        break;\n    }\n    return 1;\n}\n");
        }
        s.push_str("\nvoid sm_run(void)\n{\n    while (sm_step()) {\n    }\n}\n");

        self.bus_inbound(&mut s);
        self.injections(&mut s);
        s
    }

    fn class_types(&self, s: &mut String, class: &ClassDef) {
        let c = &class.name;
        let _ = writeln!(s, "\n/* ---- class {c} ---- */\n");
        let states: Vec<String> = class
            .machine
            .states
            .iter()
            .enumerate()
            .map(|(i, st)| format!("sm_{c}_st_{} = {i}", st.name))
            .collect();
        let _ = writeln!(s, "enum {{ {} }};", states.join(", "));
        if !class.signals.is_empty() {
            let sigs: Vec<String> = class
                .signals
                .iter()
                .enumerate()
                .map(|(i, sig)| format!("sm_{c}_ev_{} = {i}", sig.name))
                .collect();
            let _ = writeln!(s, "enum {{ {} }};", sigs.join(", "));
        }
        s.push('\n');
        s.push_str("typedef struct {\n");
        for a in &class.attributes {
            let _ = writeln!(s, "    {} a_{};", c_type(a.ty), a.name);
        }
        s.push_str("    uint32_t state;\n    sm_queue_t queue;\n");
        let _ = writeln!(s, "}} sm_{c}_t;");
    }

    fn class_functions(&self, s: &mut String, class: &ClassDef) {
        let c = &class.name;
        let _ = writeln!(s, "\nstatic void sm_{c}_init(sm_{c}_t *self)\n{{");
        for a in &class.attributes {
            let lit = match a.default {
                Literal::Bool(b) => u32::from(b),
                Literal::Int(n) => n,
            };
            let _ = writeln!(s, "    self->a_{} = {lit}u;", a.name);
        }
        let initial = &class.machine.initial;
        let _ = writeln!(s, "    self->state = sm_{c}_st_{initial};");
        s.push_str("    self->queue.head = 0u;\n    self->queue.count = 0u;\n}\n");

        let _ = writeln!(s, "\nstatic void sm_{c}_dispatch(sm_{c}_t *self, const sm_event_t *ev)\n{{");
        s.push_str("    switch (self->state) {\n");
        for st in &class.machine.states {
            let _ = writeln!(s, "    case sm_{c}_st_{}:", st.name);
            s.push_str("        switch (ev->sig) {\n");
            for t in &st.transitions {
                let Some(sig) = class.signal(&t.signal) else {
                    continue;
                };
                let _ = writeln!(s, "        case sm_{c}_ev_{}: {{", sig.name);
                for (i, p) in sig.params.iter().enumerate() {
                    let ty = c_type(p.ty);
                    let _ = writeln!(s, "            const {ty} p_{} = ({ty})ev->args[{i}];", p.name);
                    let _ = writeln!(s, "            (void)p_{};", p.name);
                }
                let env = ActionEnv { class, trigger: sig };
                self.stmts(s, &env, &t.actions, 12);
                let _ = writeln!(s, "            self->state = sm_{c}_st_{};", t.target);
                s.push_str("            return;\n        }\n");
            }
            s.push_str("        default:\n            break;\n        }\n        break;\n");
        }
        s.push_str("    default:\n        break;\n    }\n");
        s.push_str("    /* No transition: the event is consumed without effect. */\n}\n");
    }

    fn stmts(&self, s: &mut String, env: &ActionEnv<'_>, block: &[ActionStmt], indent: usize) {
        let pad = " ".repeat(indent);
        for stmt in block {
            match stmt {
                ActionStmt::Assign { attr, value } => {
                    let Some(ty) = env.attr_type(attr) else {
                        continue;
                    };
                    let _ = writeln!(
                        s,
                        "{pad}self->a_{attr} = ({})({});",
                        c_type(ty),
                        cexpr(value, env, Some(ty))
                    );
                }
                ActionStmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let _ = writeln!(s, "{pad}if ({}) {{", cexpr(cond, env, Some(ScalarType::Bool)));
                    self.stmts(s, env, then_branch, indent + 4);
                    if let Some(else_branch) = else_branch {
                        let _ = writeln!(s, "{pad}}} else {{");
                        self.stmts(s, env, else_branch, indent + 4);
                    }
                    let _ = writeln!(s, "{pad}}}");
                }
                ActionStmt::Send {
                    instance,
                    signal,
                    args,
                } => self.send(s, env, instance, signal, args, &pad),
            }
        }
    }

    fn send(&self, s: &mut String, env: &ActionEnv<'_>, instance: &str, signal: &str, args: &[Expr], pad: &str) {
        let Some(target_class) = self.model.class_of(instance) else {
            return;
        };
        let Some(sig) = target_class.signal(signal) else {
            return;
        };
        if self.partition.domain(&target_class.name) == Domain::Sw {
            let _ = writeln!(s, "{pad}{{");
            let _ = writeln!(s, "{pad}    uint32_t args[SM_MAX_ARGS] = {{0u}};");
            for (i, (arg, p)) in args.iter().zip(&sig.params).enumerate() {
                let _ = writeln!(s, "{pad}    args[{i}] = (uint32_t)({});", cexpr(arg, env, Some(p.ty)));
            }
            let _ = writeln!(
                s,
                "{pad}    sm_post_{instance}(sm_{}_ev_{}, args);",
                target_class.name, sig.name
            );
            let _ = writeln!(s, "{pad}}}");
            return;
        }
        let Some(entry) = self.manifest.signal(&target_class.name, &sig.name) else {
            let _ = writeln!(s, "{pad}/* send {instance}.{signal}: no route crosses the bus */");
            return;
        };
        let words = payload_words(entry.payload_total_bits);
        let _ = writeln!(s, "{pad}{{");
        let _ = writeln!(s, "{pad}    uint32_t payload[{words}] = {{0u}};");
        for ((arg, p), field) in args.iter().zip(&sig.params).zip(&entry.payload) {
            let _ = writeln!(
                s,
                "{pad}    sm_pack(payload, {}u, {}u, (uint32_t)({}));",
                field.bit_offset,
                field.width_bits,
                cexpr(arg, env, Some(p.ty))
            );
        }
        let _ = writeln!(
            s,
            "{pad}    bus_send({}, {}u, payload);",
            entry.macro_name(),
            self.instance_slot(instance)
        );
        let _ = writeln!(s, "{pad}}}");
    }

    fn bus_inbound(&self, s: &mut String) {
        s.push_str("\nvoid dispatch_from_bus(uint32_t id, uint32_t instance, const uint32_t *payload)\n{\n");
        s.push_str("    uint32_t args[SM_MAX_ARGS] = {0u};\n\n    (void)instance;\n    (void)payload;\n    (void)args;\n");
        s.push_str("    switch (id) {\n");
        for entry in self.manifest.signals.iter().filter(|e| e.direction == Direction::HwToSw) {
            let _ = writeln!(s, "    case {}:", entry.macro_name());
            for (i, field) in entry.payload.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "        args[{i}] = sm_unpack(payload, {}u, {}u);",
                    field.bit_offset, field.width_bits
                );
            }
            s.push_str("        switch (instance) {\n");
            for (k, inst) in self.model.instances_of(&entry.receiver_class).enumerate() {
                let _ = writeln!(
                    s,
                    "        case {k}u:\n            sm_post_{}(sm_{}_ev_{}, args);\n            break;",
                    inst.name, entry.receiver_class, entry.signal
                );
            }
            s.push_str("        default:\n            break;\n        }\n        break;\n");
        }
        s.push_str("    default:\n        break;\n    }\n}\n");
    }

    fn injections(&self, s: &mut String) {
        let protos = self.injection_prototypes();
        let mut protos = protos.into_iter();
        for inst in &self.model.instances {
            if !self.is_sw_instance(&inst.name) {
                continue;
            }
            let Some(class) = self.model.class(&inst.class) else {
                continue;
            };
            for sig in &class.signals {
                let proto = protos.next().expect("one prototype per signal");
                let _ = writeln!(s, "\n{proto}\n{{\n    uint32_t args[SM_MAX_ARGS] = {{0u}};\n");
                for (i, p) in sig.params.iter().enumerate() {
                    let _ = writeln!(s, "    args[{i}] = (uint32_t)p_{};", p.name);
                }
                let _ = writeln!(s, "    sm_post_{}(sm_{}_ev_{}, args);\n}}", inst.name, class.name, sig.name);
            }
        }
    }
}

/// Shared queue, packing and sequencing helpers.
const RUNTIME: &str = r#"
typedef struct {
    uint32_t seq;
    uint32_t sig;
    uint32_t args[SM_MAX_ARGS];
} sm_event_t;

typedef struct {
    sm_event_t items[SM_QUEUE_DEPTH];
    uint32_t head;
    uint32_t count;
} sm_queue_t;

static uint32_t sm_next_seq;

static void sm_queue_push(sm_queue_t *q, uint32_t sig, const uint32_t *args)
{
    uint32_t i;
    sm_event_t *slot;

    if (q->count == SM_QUEUE_DEPTH) {
        return; /* overflow: dropped */
    }
    slot = &q->items[(q->head + q->count) % SM_QUEUE_DEPTH];
    slot->seq = sm_next_seq++;
    slot->sig = sig;
    for (i = 0u; i < SM_MAX_ARGS; i++) {
        slot->args[i] = args[i];
    }
    q->count++;
}

static void sm_queue_pop(sm_queue_t *q, sm_event_t *out)
{
    *out = q->items[q->head];
    q->head = (q->head + 1u) % SM_QUEUE_DEPTH;
    q->count--;
}

static uint32_t sm_queue_head(const sm_queue_t *q)
{
    return q->items[q->head].seq;
}

/* Bit 0 of the payload is bit 0 of words[0]; fields may straddle words. */
static void sm_pack(uint32_t *words, uint32_t offset, uint32_t width, uint32_t value)
{
    uint32_t i;

    for (i = 0u; i < width; i++) {
        if ((value >> i) & 1u) {
            words[(offset + i) / 32u] |= 1u << ((offset + i) % 32u);
        }
    }
}

static uint32_t sm_unpack(const uint32_t *words, uint32_t offset, uint32_t width)
{
    uint32_t i;
    uint32_t value = 0u;

    for (i = 0u; i < width; i++) {
        value |= ((words[(offset + i) / 32u] >> ((offset + i) % 32u)) & 1u) << i;
    }
    return value;
}
"#;

/// Translates an expression. Arithmetic is done in `uint32_t` and narrowed to
/// the operand width, which is exactly wrap-around modulo `2^width`.
fn cexpr(e: &Expr, env: &dyn TypeEnv, context: Option<ScalarType>) -> String {
    let ty_of = |e: &Expr, ctx: Option<ScalarType>| infer(e, env).map_or(ScalarType::U32, |t| t.settle(ctx));
    match e {
        Expr::Lit(Literal::Bool(b)) => format!("{}u", u32::from(*b)),
        Expr::Lit(Literal::Int(n)) => format!("{n}u"),
        Expr::Attr(name) => format!("self->a_{name}"),
        Expr::Param(name) => format!("p_{name}"),
        Expr::Unary(UnaryOp::Not, inner) => format!("(!{})", cexpr(inner, env, Some(ScalarType::Bool))),
        Expr::Unary(UnaryOp::Neg, inner) => {
            let ty = ty_of(e, context);
            format!("(({})(0u - (uint32_t)({})))", c_type(ty), cexpr(inner, env, Some(ty)))
        }
        Expr::Binary(op, l, r) if op.is_logical() => {
            let sym = if *op == BinaryOp::And { "&&" } else { "||" };
            format!(
                "({} {sym} {})",
                cexpr(l, env, Some(ScalarType::Bool)),
                cexpr(r, env, Some(ScalarType::Bool))
            )
        }
        Expr::Binary(op, l, r) if op.is_arithmetic() => {
            let ty = ty_of(e, context);
            format!(
                "(({})((uint32_t)({}) {} (uint32_t)({})))",
                c_type(ty),
                cexpr(l, env, Some(ty)),
                op.symbol(),
                cexpr(r, env, Some(ty))
            )
        }
        Expr::Binary(op, l, r) => {
            let operand = operand_type(l, r, env);
            format!(
                "((uint32_t)({}) {} (uint32_t)({}))",
                cexpr(l, env, Some(operand)),
                op.symbol(),
                cexpr(r, env, Some(operand))
            )
        }
    }
}

/// Common type of a comparison's operands.
pub(super) fn operand_type(l: &Expr, r: &Expr, env: &dyn TypeEnv) -> ScalarType {
    match (infer(l, env), infer(r, env)) {
        (Ok(ExprType::Known(t)), _) | (_, Ok(ExprType::Known(t))) => t,
        _ => ScalarType::U32,
    }
}
