#include "erupt/urdf.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "erupt/error.hpp"

namespace erupt
{
namespace pt = boost::property_tree;

namespace
{
std::optional<std::string> attribute(const pt::ptree& node, const std::string& name)
{
  if (auto v = node.get_optional<std::string>("<xmlattr>." + name))
    return *v;
  return std::nullopt;
}

std::string requireAttribute(const pt::ptree& node, const std::string& element, const std::string& name)
{
  auto v = attribute(node, name);
  if (!v)
    throw Error(ErrorCode::MalformedXml, "<" + element + "> is missing attribute '" + name + "'");
  return *v;
}

double parseNumber(const std::string& text, const std::string& what)
{
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double v = 0.0;
  if (!(in >> v) || !std::isfinite(v))
    throw Error(ErrorCode::InvalidArgument, "invalid number '" + text + "' for " + what);
  return v;
}

Eigen::Vector3d parseVector3(const std::string& text, const std::string& what)
{
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  Eigen::Vector3d v;
  if (!(in >> v.x() >> v.y() >> v.z()) || !v.allFinite())
    throw Error(ErrorCode::InvalidArgument, "invalid 3-vector '" + text + "' for " + what);
  std::string rest;
  if (in >> rest)
    throw Error(ErrorCode::InvalidArgument, "too many components in '" + text + "' for " + what);
  return v;
}

Pose parseOrigin(const pt::ptree& parent)
{
  auto origin = parent.get_child_optional("origin");
  if (!origin)
    return Pose();
  Eigen::Vector3d xyz = Eigen::Vector3d::Zero();
  Eigen::Vector3d rpy = Eigen::Vector3d::Zero();
  if (auto v = attribute(*origin, "xyz"))
    xyz = parseVector3(*v, "origin xyz");
  if (auto v = attribute(*origin, "rpy"))
    rpy = parseVector3(*v, "origin rpy");
  return Pose::fromRpy(xyz, rpy);
}

bool truthy(const std::optional<std::string>& v)
{
  return v && (*v == "true" || *v == "1");
}

std::optional<Eigen::AlignedBox3d> resolveMesh(const std::string& filename, const UrdfParseOptions& options)
{
  if (options.mesh_bounds)
    return options.mesh_bounds(filename);
  std::string path = filename;
  constexpr std::string_view file_scheme = "file://";
  if (path.rfind(file_scheme, 0) == 0)
    path = path.substr(file_scheme.size());
  else if (path.find("://") != std::string::npos)
    return std::nullopt;
  std::filesystem::path p(path);
  if (p.is_relative() && !options.base_dir.empty())
    p = options.base_dir / p;
  return readMeshBounds(p);
}

// Returns false when the geometry was dropped.
bool parseCollision(const pt::ptree& node, const std::string& link_name, const UrdfParseOptions& options,
                    std::vector<UrdfWarning>* warnings, CollisionGeometry& out)
{
  out.offset = parseOrigin(node);
  auto geometry = node.get_child_optional("geometry");
  if (!geometry)
    throw Error(ErrorCode::MalformedXml, "collision of link '" + link_name + "' has no <geometry>");

  for (const auto& [tag, child] : *geometry)
  {
    if (tag == "box")
    {
      out.shape = Shape::box(0.5 * parseVector3(requireAttribute(child, tag, "size"), "box size"));
      return true;
    }
    if (tag == "sphere")
    {
      out.shape = Shape::sphere(parseNumber(requireAttribute(child, tag, "radius"), "sphere radius"));
      return true;
    }
    if (tag == "cylinder" || tag == "capsule")
    {
      const double radius = parseNumber(requireAttribute(child, tag, "radius"), tag + " radius");
      const double length = parseNumber(requireAttribute(child, tag, "length"), tag + " length");
      const bool capsule = tag == "capsule" || options.cylinders_as_capsules || truthy(attribute(child, "capsule"));
      out.shape = capsule ? Shape::capsule(radius, 0.5 * length) : Shape::cylinder(radius, 0.5 * length);
      return true;
    }
    if (tag == "mesh")
    {
      const std::string filename = requireAttribute(child, tag, "filename");
      Eigen::Vector3d scale = Eigen::Vector3d::Ones();
      if (auto s = attribute(child, "scale"))
        scale = parseVector3(*s, "mesh scale");
      auto bounds = resolveMesh(filename, options);
      if (!bounds || bounds->isEmpty())
      {
        if (warnings)
          warnings->push_back({ link_name, "mesh '" + filename + "' could not be read; collision geometry dropped" });
        return false;
      }
      Eigen::Vector3d lo = bounds->min().cwiseProduct(scale);
      Eigen::Vector3d hi = bounds->max().cwiseProduct(scale);
      Eigen::Vector3d center = 0.5 * (lo + hi);
      Eigen::Vector3d half = 0.5 * (hi - lo).cwiseAbs();
      // Flat meshes still need a volume.
      half = half.cwiseMax(Eigen::Vector3d::Constant(1e-3));
      out.shape = Shape::box(half);
      out.offset = out.offset * Pose(center);
      if (warnings)
        warnings->push_back({ link_name, "mesh '" + filename + "' replaced by its bounding box" });
      return true;
    }
  }
  throw Error(ErrorCode::MalformedXml, "collision of link '" + link_name + "' has no supported geometry");
}

JointType parseJointType(const std::string& type, const std::string& joint_name)
{
  if (type == "revolute")
    return JointType::Revolute;
  if (type == "prismatic")
    return JointType::Prismatic;
  if (type == "continuous")
    return JointType::Continuous;
  if (type == "fixed")
    return JointType::Fixed;
  throw Error(ErrorCode::InvalidArgument, "joint '" + joint_name + "' has unsupported type '" + type + "'");
}

Joint parseJoint(const pt::ptree& node)
{
  Joint joint;
  joint.name = requireAttribute(node, "joint", "name");
  joint.type = parseJointType(requireAttribute(node, "joint", "type"), joint.name);
  joint.origin = parseOrigin(node);

  auto parent = node.get_child_optional("parent");
  auto child = node.get_child_optional("child");
  if (!parent || !child)
    throw Error(ErrorCode::MalformedXml, "joint '" + joint.name + "' needs <parent> and <child>");
  joint.parent_link = requireAttribute(*parent, "parent", "link");
  joint.child_link = requireAttribute(*child, "child", "link");

  if (auto axis = node.get_child_optional("axis"))
    if (auto xyz = attribute(*axis, "xyz"))
      joint.axis = parseVector3(*xyz, "joint axis");
  if (joint.type != JointType::Fixed)
  {
    const double n = joint.axis.norm();
    if (n < 1e-12)
      throw Error(ErrorCode::InvalidArgument, "joint '" + joint.name + "' has a zero axis");
    joint.axis /= n;
  }

  if (joint.type != JointType::Fixed)
  {
    if (auto limit = node.get_child_optional("limit"))
    {
      if (joint.type != JointType::Continuous)
      {
        if (auto v = attribute(*limit, "lower"))
          joint.limits.lower = parseNumber(*v, "lower limit");
        if (auto v = attribute(*limit, "upper"))
          joint.limits.upper = parseNumber(*v, "upper limit");
      }
      if (auto v = attribute(*limit, "velocity"))
        joint.limits.max_velocity = parseNumber(*v, "velocity limit");
    }
    else if (joint.type != JointType::Continuous)
    {
      throw Error(ErrorCode::MissingLimit, "joint '" + joint.name + "' has no <limit>");
    }
  }
  return joint;
}

}  // namespace

RobotModel parseUrdf(std::string_view xml_text, const UrdfParseOptions& options, std::vector<UrdfWarning>* warnings)
{
  pt::ptree tree;
  try
  {
    std::istringstream in{ std::string(xml_text) };
    pt::read_xml(in, tree);
  }
  catch (const pt::xml_parser_error& e)
  {
    throw Error(ErrorCode::MalformedXml, e.what());
  }

  auto robot = tree.get_child_optional("robot");
  if (!robot)
    throw Error(ErrorCode::MalformedXml, "document root is not <robot>");

  const std::string name = attribute(*robot, "name").value_or("robot");
  std::vector<Link> links;
  std::vector<Joint> joints;
  std::vector<RobotModel::GroupSpec> groups;

  for (const auto& [tag, node] : *robot)
  {
    if (tag == "link")
    {
      Link link;
      link.name = requireAttribute(node, "link", "name");
      for (const auto& [ctag, cnode] : node)
      {
        if (ctag != "collision")
          continue;
        CollisionGeometry geometry;
        if (parseCollision(cnode, link.name, options, warnings, geometry))
          link.collision_geometries.push_back(geometry);
      }
      links.push_back(std::move(link));
    }
    else if (tag == "joint")
    {
      joints.push_back(parseJoint(node));
    }
    else if (tag == "group")
    {
      groups.push_back({ requireAttribute(node, "group", "name"), requireAttribute(node, "group", "base_link"),
                         requireAttribute(node, "group", "tip_link") });
    }
  }

  return RobotModel(name, std::move(links), std::move(joints), std::move(groups));
}

RobotModel loadUrdfFile(const std::filesystem::path& path, UrdfParseOptions options, std::vector<UrdfWarning>* warnings)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open URDF '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (options.base_dir.empty())
    options.base_dir = path.parent_path();
  return parseUrdf(buffer.str(), options, warnings);
}

namespace
{
std::string formatVector(const Eigen::Vector3d& v)
{
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << v.x() << ' ' << v.y() << ' ' << v.z();
  return out.str();
}

std::string formatNumber(double v)
{
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << v;
  return out.str();
}

void writeOrigin(std::ostream& out, const Pose& pose, const std::string& indent)
{
  Eigen::Vector3d rpy = pose.orientation.toRotationMatrix().eulerAngles(2, 1, 0).reverse();
  // eulerAngles returns yaw, pitch, roll for (2,1,0); reversed to roll, pitch, yaw.
  out << indent << "<origin xyz=\"" << formatVector(pose.position) << "\" rpy=\"" << formatVector(rpy) << "\"/>\n";
}
}  // namespace

std::string writeUrdf(const RobotModel& model)
{
  std::ostringstream out;
  out << "<?xml version=\"1.0\"?>\n<robot name=\"" << model.name() << "\">\n";
  for (const Link& link : model.links())
  {
    out << "  <link name=\"" << link.name << "\">\n";
    for (const auto& geometry : link.collision_geometries)
    {
      out << "    <collision>\n";
      writeOrigin(out, geometry.offset, "      ");
      out << "      <geometry>\n";
      const Shape& s = geometry.shape;
      switch (s.kind)
      {
        case ShapeKind::Box:
          out << "        <box size=\"" << formatVector(2.0 * s.half_extents) << "\"/>\n";
          break;
        case ShapeKind::Sphere:
          out << "        <sphere radius=\"" << formatNumber(s.radius) << "\"/>\n";
          break;
        case ShapeKind::Cylinder:
          out << "        <cylinder radius=\"" << formatNumber(s.radius) << "\" length=\""
              << formatNumber(2.0 * s.half_length) << "\"/>\n";
          break;
        case ShapeKind::Capsule:
          out << "        <cylinder radius=\"" << formatNumber(s.radius) << "\" length=\""
              << formatNumber(2.0 * s.half_length) << "\" capsule=\"true\"/>\n";
          break;
      }
      out << "      </geometry>\n    </collision>\n";
    }
    out << "  </link>\n";
  }
  for (const Joint& joint : model.joints())
  {
    out << "  <joint name=\"" << joint.name << "\" type=\"" << jointTypeName(joint.type) << "\">\n";
    writeOrigin(out, joint.origin, "    ");
    out << "    <parent link=\"" << joint.parent_link << "\"/>\n";
    out << "    <child link=\"" << joint.child_link << "\"/>\n";
    if (joint.actuated())
    {
      out << "    <axis xyz=\"" << formatVector(joint.axis) << "\"/>\n";
      const JointLimits& lim = joint.limits;
      if (lim.lower || lim.upper || lim.max_velocity)
      {
        out << "    <limit";
        if (lim.lower)
          out << " lower=\"" << formatNumber(*lim.lower) << "\"";
        if (lim.upper)
          out << " upper=\"" << formatNumber(*lim.upper) << "\"";
        if (lim.max_velocity)
          out << " velocity=\"" << formatNumber(*lim.max_velocity) << "\"";
        out << " effort=\"0\"/>\n";
      }
    }
    out << "  </joint>\n";
  }
  for (const Group& group : model.groups())
    out << "  <group name=\"" << group.name << "\" base_link=\"" << group.base_link << "\" tip_link=\""
        << group.tip_link << "\"/>\n";
  out << "</robot>\n";
  return out.str();
}

std::optional<Eigen::AlignedBox3d> readMeshBounds(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Eigen::AlignedBox3d box;
  box.setEmpty();

  std::string ext = path.extension().string();
  for (auto& c : ext)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  auto scanText = [&](std::string_view keyword) {
    std::istringstream lines(data);
    lines.imbue(std::locale::classic());
    std::string line;
    while (std::getline(lines, line))
    {
      std::istringstream ls(line);
      ls.imbue(std::locale::classic());
      std::string word;
      ls >> word;
      if (word != keyword)
        continue;
      Eigen::Vector3d v;
      if (ls >> v.x() >> v.y() >> v.z())
        box.extend(v);
    }
  };

  if (ext == ".obj")
  {
    scanText("v");
  }
  else if (ext == ".stl")
  {
    constexpr std::size_t header = 80;
    if (data.size() >= header + 4)
    {
      std::uint32_t count = 0;
      std::memcpy(&count, data.data() + header, 4);
      if (data.size() == header + 4 + static_cast<std::size_t>(count) * 50)
      {
        for (std::uint32_t t = 0; t < count; ++t)
        {
          const char* tri = data.data() + header + 4 + static_cast<std::size_t>(t) * 50 + 12;
          for (int k = 0; k < 3; ++k)
          {
            float xyz[3];
            std::memcpy(xyz, tri + k * 12, 12);
            box.extend(Eigen::Vector3d(xyz[0], xyz[1], xyz[2]));
          }
        }
        return box.isEmpty() ? std::nullopt : std::optional(box);
      }
    }
    scanText("vertex");
  }
  if (box.isEmpty())
    return std::nullopt;
  return box;
}

}  // namespace erupt
