#pragma once

#include <memory>
#include <string>

#include "erupt/collision/robot_collision.hpp"
#include "erupt/json_codec.hpp"
#include "erupt/planning_scene.hpp"
#include "erupt/urdf.hpp"
#include "support/oracles.hpp"

namespace erupt::test
{
inline std::shared_ptr<const RobotModel> loadModel(const std::string& name)
{
  return std::make_shared<const RobotModel>(loadUrdfFile(dataPath("urdf/" + name)));
}

/// Scene built from a bundled scene file through the normal mutation path.
inline PlanningScene loadScene(const std::string& name, std::shared_ptr<const RobotModel> model)
{
  const json::SceneDocument doc = json::loadSceneFile(dataPath("scenes/" + name));
  PlanningScene scene(std::move(model));
  for (const auto& o : doc.objects)
    scene.addObject(o);
  if (doc.robot_state)
    scene.setRobotState(*doc.robot_state);
  return scene;
}

inline bool pathValidAtHalfStep(const RobotModel& model, const std::vector<JointState>& path,
                                const std::vector<CollisionObject>& objects, double edge_step)
{
  for (std::size_t i = 0; i < path.size(); ++i)
  {
    if (robotInCollision(model, path[i], objects).in_collision)
      return false;
    if (i > 0 && !segmentValid(model, path[i - 1], path[i], objects, 0.5 * edge_step))
      return false;
  }
  return true;
}

}  // namespace erupt::test
