class Vec {
public:
  bool operator==(const Vec& o) const;
  Vec& operator+=(const Vec& o);
  int operator()(int i);
};
