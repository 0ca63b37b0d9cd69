class Stream {
public:
  virtual int read(char* buf, int n) = 0;
  virtual void close() = 0;
};

class File : public Stream {
public:
  int read(char* buf, int n) override;
  void close() override { }
};
