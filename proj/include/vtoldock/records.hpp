#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vtoldock {

// One row of a training log. Fields that do not apply to an agent family are
// NaN (epsilon for PPO, actor/critic losses for value agents).
struct EpisodeRecord {
  int episode = 0;
  double total_reward = 0.0;
  double mean_loss = 0.0;  // NaN when no learning update ran
  int steps = 0;
  double impact_velocity = 0.0;  // NaN unless landed
  bool landed = false;
  bool aborted = false;
  double epsilon = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

enum class LogKind { value, policy };

// Column sets; `policy` logs append actor_loss and critic_loss.
std::vector<std::string> log_columns(LogKind kind);

std::string format_double(double v);
std::string to_csv(const std::vector<EpisodeRecord>& log, LogKind kind);

// A parsed CSV file: header plus numeric columns.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of `name`; throws ConfigError naming the missing column.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);  // throws ParseError (line number)
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace vtoldock
