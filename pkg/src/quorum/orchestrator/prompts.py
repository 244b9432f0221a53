"""Strategy prompt assets.

Each voting strategy is a system prompt shipped as a plain text file; the
preference prompt is appended to every user message. Prompt text is inert
data here: nothing in the pipeline depends on its content beyond the
boxed-answer output convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

# canonical strategy label -> asset file stem
PROMPT_FILES = {
    "Original": "original",
    "Small Cases": "small_cases",
    "Work Backwards": "work_backwards",
    "Classify": "classify",
    "Code-First": "code_first",
    "Formalize-First": "formalize_first",
}
PREFERENCE_FILE = "preference"


@dataclass(frozen=True)
class StrategyPromptSet:
    system_prompts: dict[str, str]
    preference_prompt: str

    def system(self, strategy: str) -> str:
        try:
            return self.system_prompts[strategy]
        except KeyError:
            raise KeyError(
                f"no prompt for strategy {strategy!r}; have "
                f"{sorted(self.system_prompts)}"
            ) from None

    def user_message(self, problem_text: str) -> str:
        if not self.preference_prompt:
            return problem_text
        return f"{problem_text}\n\n{self.preference_prompt}"

    def validate_mixer(self, labels: list[str]) -> None:
        missing = sorted(set(labels) - set(self.system_prompts))
        if missing:
            raise KeyError(f"mixer strategies without prompts: {missing}")


def load_prompts(directory: str | Path) -> StrategyPromptSet:
    """Load prompt files from a directory; unknown stems become labels as-is."""
    directory = Path(directory)
    stems_to_labels = {stem: label for label, stem in PROMPT_FILES.items()}
    prompts: dict[str, str] = {}
    preference = ""
    for path in sorted(directory.glob("*.txt")):
        text = path.read_text(encoding="utf-8")
        if path.stem == PREFERENCE_FILE:
            preference = text
        else:
            prompts[stems_to_labels.get(path.stem, path.stem)] = text
    if not prompts:
        raise FileNotFoundError(f"no prompt files under {directory}")
    return StrategyPromptSet(system_prompts=prompts, preference_prompt=preference)


def default_prompts() -> StrategyPromptSet:
    """The packaged prompt assets."""
    return load_prompts(resources.files("quorum") / "prompts")
