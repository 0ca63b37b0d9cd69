class Host {
public:
  using size = unsigned;
  typedef int handle;
  friend class Other;
  enum Mode { On, Off };
  struct Inner { int q; };
  static_assert(sizeof(int) == 4, "int");
  int kept;
  void run();
};
