#pragma once

#include <iosfwd>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "erwlab/config.hpp"
#include "erwlab/estimators.hpp"
#include "erwlab/renewal.hpp"
#include "erwlab/trajectory.hpp"

namespace erwlab {

inline constexpr const char* kToolVersion = "0.1.0";

// Purpose tags keep the rng streams of distinct experiments disjoint even
// when they share a master seed and replica indices.
enum StreamPurpose : uint32_t {
  kStreamMain = 0,
  kStreamRange = 1,
  kStreamEscape = 2,
  kStreamAzuma = 3,
  kStreamTailDouble = 4,
  kStreamAdvance = 5,
  kStreamCrosscheck = 6,
  // 14 is reserved for deriving per-replica environment seeds (config.cpp)
};

struct ReplicaResult {
  TrajectoryStats stats;
  RenewalSequence renewal;
  std::map<int64_t, int64_t> local_time;
  bool stopped_early = false;
};

struct EnsembleResult {
  long horizon = 0;
  int slot = 0;
  std::vector<ReplicaResult> replicas;
};

struct EnsembleOptions {
  long horizon = 0;
  int slot = 0;  // one slot per horizon grid point; distinct slots draw independent streams
  uint32_t purpose = kStreamMain;
  bool track_visits = true;
  bool track_levels = true;
  bool detect_renewals = true;
  std::optional<double> stop_proj_leq;  // early stop for escape runs
  std::string traj_dir;                 // when nonempty, dump every replica path here
};

// Runs cfg.replicas independent walks with work stealing over replica
// indices.  Every replica owns its kernel and rng stream, and results land
// in index order, so the merged output does not depend on the thread count.
EnsembleResult run_ensemble(const RunConfig& cfg, const EnsembleOptions& opt);

// One persisted replica record (the subset of TrajectoryStats that goes to
// disk, plus the level histogram in json mode).
struct StatsRecord {
  long n = 0;
  long range = 0;
  double proj = 0;
  double min_proj = 0, max_proj = 0;
  long max_level_time = 0;
  std::map<int64_t, int64_t> local_time;
};

void write_stats_json(const std::string& path, const EnsembleResult& ens);
void write_stats_csv(const std::string& path, const EnsembleResult& ens);
// Reads either format, keyed on the file extension.
std::vector<StatsRecord> read_stats(const std::string& path);

// blocks.csv rows are consecutive confirmed regeneration pairs; k restarts
// at 0 on every replica.  The sidecar json records per-replica block counts.
void write_blocks_csv(const std::string& path, const EnsembleResult& ens, int d);
void write_blocks_index(const std::string& path, const EnsembleResult& ens);
// Rebuilds per-replica tau sequences from a blocks file.  Positions are
// relative to the first confirmed tau of each replica, which leaves every
// inter-tau increment intact.
std::vector<RenewalSequence> read_blocks_csv(const std::string& path, int d);

void write_trajectory_csv(const std::string& path, const std::vector<StepRecord>& steps, int d);

nlohmann::json report_to_json(const EstimatorReport& r);
uint64_t hash_file(const std::string& path);
std::string format_double(double v);  // shortest round-trip, locale free

// Output names for one horizon point; grid runs get _n<horizon> suffixes.
std::string stats_filename(const RunConfig& cfg, long horizon);
std::string blocks_filename(const RunConfig& cfg, long horizon);
std::string blocks_index_filename(const RunConfig& cfg, long horizon);

// Subcommand drivers shared by the command line tool and the python module.
// They return the process exit code but throw on config and input errors;
// the callers map exceptions to exit codes.
int cmd_validate(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_analyze(const RunConfig& cfg, std::ostream& out);
int cmd_checks(const RunConfig& cfg, std::ostream& out);  // checks.cpp

}  // namespace erwlab
