// Scratch probe for rig-level calibration; not part of the shipped targets.
#include <cstdio>

#include "scoopsim/annotation.hpp"
#include "scoopsim/bilateral_rig.hpp"
#include "scoopsim/episode.hpp"

using namespace scoopsim;

int main() {
  taskenv::TaskConfig task;
  rig::RigConfig rigc;

  for (double T : {4.0, 8.0, 12.0, 3.0, 13.0}) {
    for (double px : {-0.05, 0.0, 0.05}) {
      taskenv::TrialCommand cmd{px, 0.30, T, 0.030};
      taskenv::Scene scene =
          taskenv::make_scene(px, 0.30, cmd.mass, task.mu_plate, task);
      try {
        taskenv::ScriptedDemonstration demo(cmd, task);
        rig::TeacherRunResult res = rig::run_teacher(demo, scene, rigc, task);
        const auto trace = res.log.trace();
        const auto tf = annotation::detect_completion_time(
            trace, annotation::kTorqueThreshold, task.theta1_putting_gate);
        double max_sync = 0.0;
        // max |theta_l - theta_f| after 0.5 s
        for (std::size_t i = 250; i < res.log.t.size(); ++i) {
          for (int j = 0; j < kNumJoints; ++j) {
            max_sync = std::max(max_sync, std::abs(res.log.leader[i][j] -
                                                   res.log.follower[i][j]));
          }
        }
        double peak_tau2 = 0.0;
        for (const auto& s : trace) peak_tau2 = std::max(peak_tau2, s.tau2);
        std::printf(
            "T=%5.1f px=%+.2f  phase=%-12s transfer=%d slip=%d throw=%d  "
            "tf=%s%7.3f  err=%+6.3f  sync=%.4f  peak_tau2=%.2f\n",
            T, px, taskenv::phase_name(res.final_scene.phase),
            res.final_scene.transferred, res.final_scene.slipped,
            res.final_scene.thrown, tf ? "" : "none ", tf ? *tf : -1.0,
            tf ? *tf - T : 0.0, max_sync, peak_tau2);
      } catch (const std::exception& e) {
        std::printf("T=%5.1f px=%+.2f  EXCEPTION: %s\n", T, px, e.what());
      }
    }
  }
  return 0;
}
