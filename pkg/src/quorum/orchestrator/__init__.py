"""Contest orchestration: coordinator engine, backends, tool loop."""

from .backend import (  # noqa: F401
    AttemptBackend,
    AttemptHandle,
    ContestProblem,
    SimulatorBackend,
)
from .engine import (  # noqa: F401
    ContestConfig,
    run_contest,
    sim_problems,
    solve_problem,
)
from .http_backend import (  # noqa: F401
    HttpAttemptBackend,
    OpenAiChatClient,
    SamplingConfig,
    parse_chat_response,
)
from .prompts import StrategyPromptSet, default_prompts, load_prompts  # noqa: F401
from .sandbox_client import TcpSandboxLease, TcpSandboxPool  # noqa: F401
from .toolloop import (  # noqa: F401
    ExecOutcome,
    ModelTurn,
    NullSandbox,
    ToolCall,
    extract_boxed_answer,
    run_tool_loop,
)
