#pragma once

#include <string>

#include "pal/executor.hpp"
#include "pal/prompts.hpp"

namespace pal::runtime {

/// Carves the runnable program out of a raw completion for a code style.
/// Handles optional ``` fences, drops anything from a stray next-question
/// block onward, and trims trailing prose after the last code line. The
/// result keeps the model's own comments and blank lines. Throws
/// EmptyProgram when nothing executable remains.
std::string extract_program(const std::string& completion_text, prompts::PromptStyle style);

/// extract_program plus task wiring: attaches the style profile's prelude id
/// and answer convention.
ProgramSource program_from_completion(const std::string& completion_text,
                                      prompts::PromptStyle style,
                                      const prompts::StyleProfile& profile);

}  // namespace pal::runtime
