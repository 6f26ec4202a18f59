use std::fmt;

/// Names of the inference rules the machine applies. Each application costs
/// one unit of step budget and, when tracing is on, is appended to the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InferenceRule {
    Const,
    Var,
    OpE,
    OpF,
    Op,
    Abs,
    AppE,
    AppF,
    App,
    NewE,
    New,
    GetE,
    GetF,
    Get,
    GetProto,
    GetUndef,
    PutE,
    PutF,
    PutG,
    Put,

    SandboxFreshE,
    SandboxFresh,
    SandboxAbstraction,
    SandboxApplication,

    WrapConst,
    WrapSandbox,
    WrapNonProxyObject,
    WrapExisting,
    WrapProxyObject,

    RecompileNonFunctionObject,
    RecompileFunctionObject,
    RecompileExisting,
    RecompileProxyObject,

    AppSandbox,
    GetShadow,
    GetSandbox,
    PutSandbox,

    /// A sandbox-made object flowing back into its own sandbox is not wrapped.
    WrapInternal,
    /// An outward proxy flowing back into its sandbox unwraps to its inner object.
    WrapUnwrapOutward,
    /// Sandbox value leaving through an outward proxy or commit.
    WrapOutward,
    OutwardApp,
    OutwardGet,
    OutwardPut,
}

impl InferenceRule {
    /// The rules of the calculus proper, in presentation order. The
    /// remaining variants handle outward proxies, which only commit creates.
    pub const CALCULUS: [InferenceRule; 37] = [
        InferenceRule::Const,
        InferenceRule::Var,
        InferenceRule::OpE,
        InferenceRule::OpF,
        InferenceRule::Op,
        InferenceRule::Abs,
        InferenceRule::AppE,
        InferenceRule::AppF,
        InferenceRule::App,
        InferenceRule::NewE,
        InferenceRule::New,
        InferenceRule::GetE,
        InferenceRule::GetF,
        InferenceRule::Get,
        InferenceRule::GetProto,
        InferenceRule::GetUndef,
        InferenceRule::PutE,
        InferenceRule::PutF,
        InferenceRule::PutG,
        InferenceRule::Put,
        InferenceRule::SandboxFreshE,
        InferenceRule::SandboxFresh,
        InferenceRule::SandboxAbstraction,
        InferenceRule::SandboxApplication,
        InferenceRule::WrapConst,
        InferenceRule::WrapSandbox,
        InferenceRule::WrapNonProxyObject,
        InferenceRule::WrapExisting,
        InferenceRule::WrapProxyObject,
        InferenceRule::RecompileNonFunctionObject,
        InferenceRule::RecompileFunctionObject,
        InferenceRule::RecompileExisting,
        InferenceRule::RecompileProxyObject,
        InferenceRule::AppSandbox,
        InferenceRule::GetShadow,
        InferenceRule::GetSandbox,
        InferenceRule::PutSandbox,
    ];

    pub fn name(self) -> &'static str {
        use InferenceRule::*;
        match self {
            Const => "Const",
            Var => "Var",
            OpE => "Op-E",
            OpF => "Op-F",
            Op => "Op",
            Abs => "Abs",
            AppE => "App-E",
            AppF => "App-F",
            App => "App",
            NewE => "New-E",
            New => "New",
            GetE => "Get-E",
            GetF => "Get-F",
            Get => "Get",
            GetProto => "Get-Proto",
            GetUndef => "Get-Undef",
            PutE => "Put-E",
            PutF => "Put-F",
            PutG => "Put-G",
            Put => "Put",
            SandboxFreshE => "Sandbox-Fresh-E",
            SandboxFresh => "Sandbox-Fresh",
            SandboxAbstraction => "Sandbox-Abstraction",
            SandboxApplication => "Sandbox-Application",
            WrapConst => "Wrap-Const",
            WrapSandbox => "Wrap-Sandbox",
            WrapNonProxyObject => "Wrap-NonProxyObject",
            WrapExisting => "Wrap-Existing",
            WrapProxyObject => "Wrap-ProxyObject",
            RecompileNonFunctionObject => "Recompile-NonFunctionObject",
            RecompileFunctionObject => "Recompile-FunctionObject",
            RecompileExisting => "Recompile-Existing",
            RecompileProxyObject => "Recompile-ProxyObject",
            AppSandbox => "App-Sandbox",
            GetShadow => "Get-Shadow",
            GetSandbox => "Get-Sandbox",
            PutSandbox => "Put-Sandbox",
            WrapInternal => "Wrap-Internal",
            WrapUnwrapOutward => "Wrap-UnwrapOutward",
            WrapOutward => "Wrap-Outward",
            OutwardApp => "App-Outward",
            OutwardGet => "Get-Outward",
            OutwardPut => "Put-Outward",
        }
    }
}

impl fmt::Display for InferenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
