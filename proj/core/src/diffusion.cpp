#include "pad/diffusion.hpp"

namespace pad {

std::string DiffusionConfig::echo() const {
  std::ostringstream os;
  os << "T = " << T << "\ninfer_steps = " << infer_steps << "\nembed_dim = " << embed_dim
     << "\nhidden_dim = " << hidden_dim << "\nenc_layers = " << enc_layers
     << "\ndec_layers = " << dec_layers << "\nheads = " << heads << "\nffn_mult = " << ffn_mult
     << "\ndropout = " << dropout << "\nepochs = " << epochs << "\ninit_lr = " << init_lr
     << "\nbatch = " << batch << "\np_num = " << p_num
     << "\ncons_start_ratio = " << cons_start_ratio
     << "\ngated_cons_loss = " << (gated_cons_loss ? "true" : "false") << "\nseed = " << seed
     << "\n";
  return os.str();
}

DiffusionConfig DiffusionConfig::parse_echo(const std::string& echo) {
  DiffusionConfig c;
  for (const auto& [key, val] : detail::parse_echo_kv(echo)) {
    try {
      if (key == "T") c.T = std::stoi(val);
      else if (key == "infer_steps") c.infer_steps = std::stoi(val);
      else if (key == "embed_dim") c.embed_dim = std::stoi(val);
      else if (key == "hidden_dim") c.hidden_dim = std::stoi(val);
      else if (key == "enc_layers") c.enc_layers = std::stoi(val);
      else if (key == "dec_layers") c.dec_layers = std::stoi(val);
      else if (key == "heads") c.heads = std::stoi(val);
      else if (key == "ffn_mult") c.ffn_mult = std::stoi(val);
      else if (key == "dropout") c.dropout = std::stod(val);
      else if (key == "epochs") c.epochs = std::stoi(val);
      else if (key == "init_lr") c.init_lr = std::stod(val);
      else if (key == "batch") c.batch = std::stoi(val);
      else if (key == "p_num") c.p_num = std::stoi(val);
      else if (key == "cons_start_ratio") c.cons_start_ratio = std::stod(val);
      else if (key == "gated_cons_loss") c.gated_cons_loss = val == "true";
      else if (key == "seed") c.seed = std::stoull(val);
      else fail(ErrorKind::config, "unknown backbone checkpoint setting: " + key);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorKind::config, "bad backbone checkpoint setting: " + key + " = " + val);
    }
  }
  c.validate();
  return c;
}

NoiseSchedule NoiseSchedule::cosine(int T) {
  if (T < 1) fail(ErrorKind::config, "schedule needs at least one step");
  constexpr double s = 0.008;
  auto f = [&](double t) {
    const double arg = (t / T + s) / (1.0 + s) * (3.14159265358979323846 / 2.0);
    const double c = std::cos(arg);
    return c * c;
  };
  NoiseSchedule ns;
  ns.abar_.resize(static_cast<std::size_t>(T) + 1);
  ns.abar_[0] = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double beta = std::min(0.999, 1.0 - f(t) / f(t - 1));
    ns.abar_[static_cast<std::size_t>(t)] = ns.abar_[static_cast<std::size_t>(t) - 1] * (1.0 - beta);
  }
  return ns;
}

std::vector<int> ddim_timesteps(int T, int steps) {
  if (steps < 1 || steps > T)
    fail(ErrorKind::config, "inference step count must lie in [1, diffusion_steps]");
  std::vector<int> ts(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i)
    ts[static_cast<std::size_t>(i)] =
        static_cast<int>(std::llround(static_cast<double>(T) * i / steps));
  for (int i = 1; i <= steps; ++i)
    if (ts[static_cast<std::size_t>(i)] <= ts[static_cast<std::size_t>(i) - 1])
      fail(ErrorKind::state, "degenerate timestep ladder");
  return ts;
}

}  // namespace pad
