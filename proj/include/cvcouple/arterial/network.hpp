#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvcouple/arterial/dg_basis.hpp"
#include "cvcouple/arterial/tube_law.hpp"
#include "cvcouple/arterial/waveform.hpp"

namespace cvcouple::arterial {

/// Cosine-tapered reference-area dip. severity is the radius reduction at the throat.
struct Stenosis {
  double severity = 0.0;
  double center = 0.0;  // m from the proximal end
  double width = 0.0;   // m, full taper length
};

/// Per-point arrays hold either one value (uniform) or n_elems+1 vertex values
/// interpolated linearly along the segment.
struct VesselSegment {
  std::string id;
  double length = 0.0;
  int n_elems = 1;
  std::vector<double> A0;
  std::vector<double> E;
  std::vector<double> h;
  std::vector<double> gamma_wall;  // visco-elastic coefficient, empty means elastic
  double p_ext = 0.0;
  double rho = 1060.0;
  double mu = 4e-3;
  std::optional<Stenosis> stenosis;
};

/// Connects the distal end of `parent` to the proximal ends of `daughters`.
struct JunctionSpec {
  std::string parent;
  std::vector<std::string> daughters;
};

/// Three-element Windkessel on the distal end of `segment`.
struct TerminalRCR {
  std::string segment;
  double Z = 0.0;
  double R = 0.0;
  double C = 0.0;
  double p_out = 0.0;
  std::optional<double> p_c0;  // initial capacitor pressure, defaults to p_out
};

enum class InletMode { prescribed_flow, prescribed_pressure, coupled_valve };

struct InletSpec {
  std::string segment;
  InletMode mode = InletMode::prescribed_flow;
  Waveform waveform = Waveform::constant(0.0);
};

struct NetworkDescription {
  std::vector<VesselSegment> segments;
  std::vector<JunctionSpec> junctions;
  std::vector<TerminalRCR> terminals;
  std::optional<InletSpec> inlet;
  int order = 1;
  double cfl = 0.5;
  double coriolis = 1.0;  // only 1 is honoured
};

struct SegmentState {
  std::vector<double> A;         // nodal, n_elems * (order + 1)
  std::vector<double> u;
  double time = 0.0;
  std::vector<double> dA_dt;     // lagged area rate
  std::vector<double> rhs_prev;  // previous right-hand side [A..., u...]
};

struct NetworkState {
  std::vector<SegmentState> segments;
  std::vector<double> terminal_pc;
  double time = 0.0;
  bool has_history = false;
  double dt_prev = 0.0;
  double coupled_inflow = 0.0;
  std::uint64_t topology_key = 0;
};

struct ProbeResult {
  double P = 0.0;
  double Q = 0.0;
  double A = 0.0;
};

double stenosis_factor(double x, const Stenosis& s);
/// d/dx of stenosis_factor.
double stenosis_factor_slope(double x, const Stenosis& s);

/// Copy of `segment` with the stenosis attached. Throws ValidationError for
/// severity outside (0, 1) or a taper leaving the segment.
VesselSegment apply_stenosis_profile(const VesselSegment& segment, double severity, double center,
                                     double width);

class Network {
 public:
  /// Validates topology and geometry; starts at rest (A = A0, u = 0, p_c = p_c0).
  explicit Network(NetworkDescription desc);

  const NetworkDescription& description() const { return desc_; }
  const ReferenceElement& element() const { return ref_; }
  std::size_t n_segments() const { return segs_.size(); }
  std::size_t n_terminals() const { return desc_.terminals.size(); }
  std::size_t n_junctions() const { return desc_.junctions.size(); }
  std::size_t segment_index(const std::string& id) const;
  std::size_t n_nodes(std::size_t seg) const { return segs_[seg].A0.size(); }
  double time() const { return time_; }

  /// Largest dt accepted by step() for the current state.
  double max_stable_dt() const;
  /// Throws StabilityError above max_stable_dt(), SolverBlowup on non-physical results.
  void step(double dt);

  void set_inlet(InletMode mode, Waveform w);
  /// Inflow used by the next step in coupled_valve mode, m^3/s.
  void set_coupled_inflow(double Q) { coupled_inflow_ = Q; }
  double coupled_inflow() const { return coupled_inflow_; }
  /// Inlet boundary pressure that an inflow Q would produce against the current state.
  double inlet_pressure_for_flow(double Q) const;
  double inlet_pressure() const;

  NetworkState snapshot() const;
  void restore(const NetworkState& s);

  ProbeResult probe(std::size_t seg, double x) const;
  ProbeResult probe(const std::string& seg, double x) const { return probe(segment_index(seg), x); }

  const SegmentState& segment_state(std::size_t seg) const { return state_[seg]; }
  /// Overwrites nodal fields; clears the integrator history.
  void set_segment_state(std::size_t seg, const std::vector<double>& A, const std::vector<double>& u);
  std::vector<double> node_positions(std::size_t seg) const;
  PointParams node_params(std::size_t seg, std::size_t node) const;

  double terminal_pressure(std::size_t k) const { return pc_[k]; }
  /// Boundary flow into terminal k during the last step.
  double terminal_flow(std::size_t k) const { return terminal_q_[k]; }
  /// |Q_parent - sum Q_daughters| / max(|Q_parent|, 1e-6) per junction, last step.
  const std::vector<double>& junction_residuals() const { return junction_res_; }
  /// Largest junction residual over all steps since construction.
  double max_junction_residual() const { return max_junction_res_; }

  std::uint64_t topology_key() const { return topology_key_; }

 private:
  struct Seg {
    double he = 0.0;
    int ne = 0;
    std::vector<double> x;  // nodal positions
    std::vector<double> A0, sqA0, K, G;
    std::vector<double> A0q, sqA0q, Kq, Gq;
    double p_ext = 0.0, rho = 0.0, kr = 0.0;
    int prox_junction = -1, dist_junction = -1, terminal = -1;
    bool inlet = false;
  };
  struct BoundaryState {
    double A = 0.0, u = 0.0;
  };
  struct JunctionTopo {
    std::size_t parent;
    std::vector<std::size_t> daughters;
  };

  void build();
  PointParams params_at(const Seg& s, std::size_t node) const;
  void compute_boundaries(double t);
  void update_junction(std::size_t j);
  void compute_rhs(std::size_t seg, std::vector<double>& out);
  BoundaryState inlet_state(double value, InletMode mode) const;

  NetworkDescription desc_;
  ReferenceElement ref_;
  std::vector<Seg> segs_;
  std::vector<JunctionTopo> junctions_;
  std::vector<std::size_t> terminal_seg_;
  std::size_t inlet_seg_ = 0;

  std::vector<SegmentState> state_;
  std::vector<double> pc_;
  double time_ = 0.0;
  bool has_history_ = false;
  double dt_prev_ = 0.0;
  double coupled_inflow_ = 0.0;
  std::uint64_t topology_key_ = 0;

  std::vector<BoundaryState> left_bc_, right_bc_;
  std::vector<double> terminal_q_;
  std::vector<double> junction_res_;
  double max_junction_res_ = 0.0;
  std::vector<std::vector<double>> rhs_;  // scratch
  std::vector<double> flux1_, flux2_;     // scratch
};

Network build_network(const NetworkDescription& desc);

/// Boundary state (A, u) of a junction given the adjacent interior traces.
/// Ends are ordered parent first; sign +1 marks the parent's distal end.
struct JunctionEnd {
  double A = 0.0;
  double u = 0.0;
  PointParams params;
  int sign = -1;
};
struct EndState {
  double A = 0.0;
  double u = 0.0;
};
/// Local Newton on the end areas; throws JunctionError after 50 iterations.
std::vector<EndState> solve_junction(const std::vector<JunctionEnd>& ends);

/// Boundary state and advanced capacitor pressure of an RCR terminal.
struct TerminalUpdate {
  double A = 0.0;
  double u = 0.0;
  double p_c = 0.0;
};
TerminalUpdate terminal_rcr(const TerminalRCR& t, double p_c, double A_end, double u_end,
                            const PointParams& params, double dt);

struct PeriodicInitReport {
  NetworkState state;
  double drift = 0.0;           // L-inf inlet pressure difference of the last two cycles, Pa
  double pulse_pressure = 0.0;  // inlet pulse pressure of the last cycle, Pa
  int cycles = 0;               // periods actually run
};

/// Runs the standalone network for up to n_cycles periods under `inlet` (mode unchanged). With a
/// positive tolerance it stops once drift <= tolerance * pulse_pressure.
PeriodicInitReport init_periodic(Network& net, const Waveform& inlet, int n_cycles, double period,
                                 double dt, double tolerance = 0.0);

}  // namespace cvcouple::arterial
