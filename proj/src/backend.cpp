#include "pal/backend.hpp"

#include "pal/digest.hpp"
#include "pal/errors.hpp"

namespace pal::backend {

ReplayBackend::ReplayBackend(ReplayArchive archive) : archive_(std::move(archive)) {}

std::vector<Completion> ReplayBackend::complete(const std::string& prompt,
                                                const DecodeParams& params) {
  params.validate();
  std::vector<Completion> out;
  out.reserve(params.n_samples);
  for (int i = 0; i < params.n_samples; ++i) {
    const std::string digest = replay_digest(prompt, params, i);
    const ArchiveEntry* entry = archive_.find(digest);
    if (!entry) {
      throw ReplayMiss("no recorded completion for digest " + digest + " (sample " +
                       std::to_string(i) + ")");
    }
    Completion c;
    c.text = entry->text;
    c.finish_reason = entry->finish_reason;
    c.sample_index = i;
    c.backend_id = id();
    out.push_back(std::move(c));
  }
  return out;
}

RecordingBackend::RecordingBackend(std::shared_ptr<CompletionBackend> inner,
                                   std::shared_ptr<ArchiveWriter> writer)
    : inner_(std::move(inner)), writer_(std::move(writer)) {}

std::string RecordingBackend::id() const { return "record:" + inner_->id(); }

std::vector<Completion> RecordingBackend::complete(const std::string& prompt,
                                                   const DecodeParams& params) {
  auto completions = inner_->complete(prompt, params);
  const std::string prompt_sha = sha256_hex(prompt);
  const std::string canonical = params.canonical_string();
  for (const auto& c : completions) {
    ArchiveEntry e;
    e.digest = replay_digest(prompt, params, c.sample_index);
    e.prompt_sha = prompt_sha;
    e.params = canonical;
    e.sample_index = c.sample_index;
    e.text = c.text;
    e.finish_reason = c.finish_reason;
    writer_->append(e);
  }
  return completions;
}

}  // namespace pal::backend
