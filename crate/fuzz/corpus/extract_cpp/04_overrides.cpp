class Shape {
public:
  virtual double area() const;
  virtual void scale(double f);
  void name();
};

class Circle : public Shape {
public:
  double area() const override;
  void scale(double f) override;
  void name();
};
