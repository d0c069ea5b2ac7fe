#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinenv/lattice.hpp"
#include "spinenv/rate_model.hpp"

namespace spinenv {

/// Raised when a run would exceed a configured size limit.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ClockKind : std::uint8_t { background = 0, spin = 1 };

/// How the two spin marks of one clock ring relate. `independent` draws
/// U0 and U1 separately; `comonotone` derives both from one uniform, which
/// keeps copies with different backgrounds ordered.
enum class MarkScheme { independent, comonotone };

struct StreamOptions {
  std::size_t max_events = 50'000'000;
  MarkScheme marks = MarkScheme::independent;
};

/// Clock rings and marks of one site up to the horizon.
struct SiteClocks {
  std::vector<double> background_times;  // C_n(x)
  std::vector<double> background_marks;  // D_n(x) on [0, b_bar]
  std::vector<double> spin_times;        // T_n(x)
  std::vector<double> spin_marks0;       // U0_n(x) on [0, c_bar0]
  std::vector<double> spin_marks1;       // U1_n(x) on [0, c_bar1]
};

struct ClockEvent {
  double time = 0;
  int site = 0;
  ClockKind kind = ClockKind::background;
  std::uint32_t index = 0;
};

/// All per-site randomness of one replica. Site x draws from substreams
/// seeded by (seed, x, kind), so sites never perturb each other.
class EventStream {
public:
  std::uint64_t seed = 0;
  double t_max = 0;
  DerivedConstants constants;
  MarkScheme marks = MarkScheme::independent;
  std::vector<SiteClocks> sites;

  std::size_t event_count() const;
  /// Every clock ring in time order; ties by site, then background first.
  std::vector<ClockEvent> merged() const;
};

EventStream generate_streams(const ModelSpec& spec, std::uint64_t seed, double t_max,
                             const StreamOptions& options = {});

/// One coordinate change. Layer 0 is the background, layer k >= 1 is spin
/// layer k-1.
struct FlipRecord {
  double time = 0;
  int site = 0;
  int layer = 0;
  std::uint8_t from = 0;
  std::uint8_t to = 0;

  friend bool operator==(const FlipRecord&, const FlipRecord&) = default;
};

struct Trajectory {
  JointState initial;
  std::vector<FlipRecord> events;
  JointState final_state;
  double t_max = 0;
  /// Ordered-layer violations seen while evolving (only counted when the
  /// initial state was ordered).
  std::size_t order_violations = 0;

  std::vector<std::string> layer_names() const;
};

/// Applies the event log to `initial`.
JointState replay(const JointState& initial, std::span<const FlipRecord> events);

/// Background-only evolution driven by the background clocks.
Trajectory evolve_background(const ModelSpec& spec, const Configuration& beta0,
                             const EventStream& es);

/// Spin layers driven by a given background path, all layers reading the
/// same marks. Returns a trajectory that includes the background flips.
Trajectory evolve_spins(const ModelSpec& spec, const Trajectory& background,
                        const std::vector<Configuration>& eta0, const EventStream& es);

/// Convenience: background then spins from one joint initial state.
Trajectory simulate_graphical(const ModelSpec& spec, const JointState& initial,
                              const EventStream& es);

/// Several joint copies (each with its own background) driven by one event
/// stream, advanced incrementally. Used by estimators that observe at a grid
/// of times.
class GraphicalRunner {
public:
  using FlipSink = std::function<void(int copy, const FlipRecord&)>;
  /// Called once every copy has processed a clock ring.
  using RingHook = std::function<void(const ClockEvent&)>;

  GraphicalRunner(const ModelSpec& spec, const EventStream& es);

  /// Processes every clock ring with time <= t.
  void advance_to(double t, std::vector<JointState>& copies, const FlipSink& sink = {},
                  const RingHook& after_ring = {});
  double time() const { return now_; }

private:
  const ModelSpec& spec_;
  const EventStream& es_;
  std::vector<ClockEvent> events_;
  std::size_t cursor_ = 0;
  double now_ = 0;
};

/// Which side of [0, c_bar] (in rate units) an acceptance window hangs from.
enum class Anchor { top, bottom };

/// Acceptance window of one layer at one site, measured in rate units: the
/// mark U^i is rescaled by c_bar / c_bar^i so the full range is [0, c_bar].
/// 0->1 windows hang from the top, 1->0 windows from the bottom; the extent
/// equals the layer's flip rate.
struct AcceptanceWindow {
  Anchor anchor = Anchor::top;
  double extent = 0;
};

AcceptanceWindow acceptance_window(int center_bit, double rate);

/// Joint flip rates at one site implied by nested acceptance windows.
/// Keys are bitmasks over spin layers (bit j set = layer j flips), values are
/// rates; zero-rate outcomes are omitted.
std::map<std::uint32_t, double> window_rates(const SpinRatePair& spin, const DerivedConstants& k,
                                             int beta_bit, std::span<const Triple> layers);

/// Flip decision for one layer under the mark rule (used by the simulator,
/// exposed for testing window membership).
bool spin_mark_accepts(const DerivedConstants& k, int beta_bit, double mark, int center_bit,
                       double rate);
bool background_mark_accepts(double b_bar, double mark, int center_bit, double rate);

}  // namespace spinenv
